// Thin bindings. Structured values cross the boundary as JSON text using the
// library's own serializers; the Python package turns them into dicts.

#include "acudesk/anatomy.hpp"
#include "acudesk/error.hpp"
#include "acudesk/image.hpp"
#include "acudesk/io.hpp"
#include "acudesk/json.hpp"
#include "acudesk/needling.hpp"
#include "acudesk/nrrd.hpp"
#include "acudesk/phantom.hpp"
#include "acudesk/registration.hpp"
#include "acudesk/render.hpp"
#include "acudesk/service.hpp"
#include "acudesk/session.hpp"
#include "acudesk/transfer.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace acudesk;

namespace {

template <class T>
T from_text(const std::string& text) {
    return parse_json(text).get<T>();
}

template <class T>
std::string to_text(const T& value) {
    return Json(value).dump();
}

Vec3 vec(const std::array<double, 3>& a) { return {a[0], a[1], a[2]}; }

py::array_t<float> scalars_of(const Volume& v) {
    const auto& d = v.dims();
    // x varies fastest on disk, so the natural numpy shape is (z, y, x).
    py::array_t<float> out({d[2], d[1], d[0]});
    std::copy(v.scalars().begin(), v.scalars().end(), out.mutable_data());
    return out;
}

py::array_t<std::uint8_t> rgba8(const Image& img) {
    const auto bytes = to_rgba8(img);
    py::array_t<std::uint8_t> out({img.height, img.width, 4});
    std::copy(bytes.begin(), bytes.end(), out.mutable_data());
    return out;
}

} // namespace

PYBIND11_MODULE(_acudesk, m) {
    m.doc() = "acudesk core bindings";

    static py::exception<Error> error(m, "AcudeskError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            PyErr_SetString(error.ptr(), e.what());
        }
    });

    py::class_<Volume>(m, "Volume")
        .def_property_readonly("dims", [](const Volume& v) { return v.dims(); })
        .def_property_readonly("spacing", [](const Volume& v) { return std::array{v.spacing().x(), v.spacing().y(), v.spacing().z()}; })
        .def_property_readonly("origin", [](const Volume& v) { return std::array{v.origin().x(), v.origin().y(), v.origin().z()}; })
        .def_property_readonly("value_range", &Volume::value_range)
        .def_property_readonly("center", [](const Volume& v) {
            const Vec3 c = v.center();
            return std::array{c.x(), c.y(), c.z()};
        })
        .def("scalars", &scalars_of)
        .def("sample", [](const Volume& v, std::array<double, 3> p) { return sample(v, vec(p)); })
        .def("histogram", [](const Volume& v, int bins) { return to_text(histogram(v, bins)); }, py::arg("bins") = 256);

    m.def("load_volume", [](const std::filesystem::path& p) {
        auto loaded = load_volume(p);
        return py::make_tuple(std::move(loaded.volume), loaded.warnings);
    });
    m.def("write_nrrd", [](const Volume& v, const std::filesystem::path& p, bool gzip) {
        write_nrrd(v, p, gzip ? NrrdEncoding::Gzip : NrrdEncoding::Raw);
    }, py::arg("volume"), py::arg("path"), py::arg("gzip") = false);
    m.def("shells_phantom", &shells_phantom, py::arg("n"), py::arg("spacing_mm") = 1.0);
    m.def("sphere_phantom", [](int n, double spacing, double radius) {
        return sphere_distance_phantom(n, spacing, radius);
    }, py::arg("n"), py::arg("spacing_mm"), py::arg("radius_mm"));

    m.def("apply_contrast", [](const std::string& tf, double c) { return apply_contrast(from_text<TransferFunction1D>(tf), c); });
    m.def("classify", [](const std::string& tf, double x) { return classify(from_text<TransferFunction1D>(tf), x); });
    m.def("preset_scheme", &preset_scheme);
    m.def("preset_transfer_function", [](const std::string& name, double lo, double hi, int steps) {
        return to_text(preset_transfer_function(name, lo, hi, steps));
    }, py::arg("name"), py::arg("c_min"), py::arg("c_max"), py::arg("steps") = 16);

    m.def("default_render_settings", [](const Volume& v) { return to_text(default_render_settings(v)); });
    m.def("framing_camera", [](const Volume& v, int w, int h) {
        const Vec3 ext = v.spacing().cwiseProduct(Vec3(v.dims()[0] - 1, v.dims()[1] - 1, v.dims()[2] - 1));
        return to_text(framing_camera(v.center(), 0.5 * ext.norm(), w, h));
    });
    m.def("render", [](const Volume& v, const std::string& tf, const std::string& settings, const std::string& camera,
                       const std::vector<std::string>& planes, int threads) {
        std::vector<SlicingPlane> ps;
        for (const auto& p : planes) ps.push_back(from_text<SlicingPlane>(p));
        RenderOptions opts;
        opts.threads = threads;
        Image img;
        {
            py::gil_scoped_release release;
            img = render(v, from_text<TransferFunction1D>(tf), from_text<RenderSettings>(settings),
                         from_text<Camera>(camera), ps, {}, opts);
        }
        return rgba8(img);
    }, py::arg("volume"), py::arg("tf"), py::arg("settings"), py::arg("camera"), py::arg("planes") = std::vector<std::string>{},
       py::arg("threads") = 0);

    m.def("align", [](const std::string& src, const std::string& dst) {
        return to_text(align(from_text<LandmarkSet>(src), from_text<LandmarkSet>(dst)));
    });
    m.def("apply_transform", [](const std::string& t, std::array<double, 3> p) {
        const Vec3 q = from_text<SimilarityTransform>(t).apply(vec(p));
        return std::array{q.x(), q.y(), q.z()};
    });

    m.def("needle_lengths", [] { return std::vector<double>(kNeedleLengthsMm.begin(), kNeedleLengthsMm.end()); });
    m.def("insert_needle", [](const std::string& id, double length, std::array<double, 3> entry,
                              std::array<double, 3> dir, double depth) {
        return to_text(insert_needle(make_needle(id, length), vec(entry), vec(dir), depth));
    });
    m.def("project_point_to_plane", [](std::array<double, 3> p, const std::string& plane) {
        const Vec3 q = project_point_to_plane(vec(p), from_text<SlicingPlane>(plane));
        return std::array{q.x(), q.y(), q.z()};
    });
    m.def("plane_from_normal", [](const std::string& id, const std::string& kind, std::array<double, 3> pos,
                                  std::array<double, 3> normal) {
        const PlaneKind k = kind == "cutout" ? PlaneKind::CutOut : PlaneKind::View;
        return to_text(SlicingPlane::from_normal(id, k, vec(pos), vec(normal)));
    });

    m.def("create_session", [](const std::string& id, const Volume& v, const std::string& path, const std::string& sha) {
        return session_to_json(create_session(id, v, ContentRef{path, sha})).dump();
    });
    m.def("mutate", [](const std::string& session, const std::string& command) {
        return session_to_json(mutate(session_from_json(parse_json(session)), command_from_json(parse_json(command)))).dump();
    });

    py::class_<Service>(m, "Service")
        .def(py::init<std::filesystem::path>())
        .def("handle", [](Service& s, const std::string& method, const std::string& path,
                          std::map<std::string, std::string> query, const std::string& body) {
            ApiRequest r{method, path, std::move(query), {}, body};
            if (!body.empty()) r.headers["Content-Type"] = "application/json";
            ApiResponse out;
            {
                py::gil_scoped_release release;
                out = s.handle(r);
            }
            return py::make_tuple(out.status, out.content_type, py::bytes(out.body), out.headers);
        }, py::arg("method"), py::arg("path"), py::arg("query") = std::map<std::string, std::string>{},
           py::arg("body") = "");
}

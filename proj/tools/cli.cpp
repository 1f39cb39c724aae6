#include "cli.hpp"

#include "acudesk/anatomy.hpp"
#include "acudesk/digest.hpp"
#include "acudesk/error.hpp"
#include "acudesk/image.hpp"
#include "acudesk/io.hpp"
#include "acudesk/json.hpp"
#include "acudesk/nrrd.hpp"
#include "acudesk/phantom.hpp"
#include "acudesk/registration.hpp"
#include "acudesk/render.hpp"
#include "acudesk/service.hpp"
#include "acudesk/session.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <charconv>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <thread>

namespace acudesk::cli {

namespace fs = std::filesystem;

namespace {

// Problems with how the tool was invoked, as opposed to with the data.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double parse_double(const std::string& s) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end) throw std::invalid_argument("not a number: '" + s + "'");
    return v;
}

Vec3 parse_triple(const std::string& s) {
    std::vector<double> parts;
    std::size_t i = 0;
    while (true) {
        const auto j = s.find(',', i);
        parts.push_back(parse_double(s.substr(i, j == std::string::npos ? std::string::npos : j - i)));
        if (j == std::string::npos) break;
        i = j + 1;
    }
    if (parts.size() != 3) throw std::invalid_argument("expected three comma-separated numbers: '" + s + "'");
    return {parts[0], parts[1], parts[2]};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << text << '\n';
}

fs::path resolve_ref(const ContentRef& ref, const fs::path& session_file) {
    fs::path p = ref.path;
    if (p.is_relative()) p = session_file.parent_path() / p;
    if (!fs::exists(p)) throw Error(ErrorCode::IoError, "referenced file not found: " + p.string());
    if (const auto actual = sha256_path(p); actual != ref.sha256)
        throw Error(ErrorCode::IoError, "content hash mismatch for " + p.string());
    return p;
}

// ---- render -----------------------------------------------------------------

struct RenderArgs {
    std::string volume, tf, method = "dvr", camera, size = "512x512", out;
    std::optional<double> iso, step;
    std::vector<std::string> planes;
    int threads = 0;
};

int cmd_render(const RenderArgs& a) {
    const auto [w, h] = parse_size(a.size);
    RenderMethod method;
    if (a.method == "dvr") method = RenderMethod::DVR;
    else if (a.method == "mip") method = RenderMethod::MIP;
    else if (a.method == "iso") method = RenderMethod::IsoSurface;
    else throw UsageError("--method must be dvr, mip or iso");
    if (method == RenderMethod::IsoSurface && !a.iso) throw UsageError("--method iso requires --iso");
    std::vector<SlicingPlane> planes;
    for (std::size_t i = 0; i < a.planes.size(); ++i) {
        try {
            planes.push_back(parse_plane_spec(a.planes[i], "p" + std::to_string(i)));
        } catch (const std::invalid_argument& e) {
            throw UsageError(std::string("--plane: ") + e.what());
        }
    }

    const auto loaded = load_volume(a.volume);
    for (const auto& w8 : loaded.warnings) std::cerr << "warning: " << w8 << '\n';
    const Volume& vol = loaded.volume;

    const auto [lo, hi] = vol.value_range();
    TransferFunction1D tf =
        a.tf.empty() ? preset_transfer_function("grayscale", lo, hi) : read_json_file(a.tf).get<TransferFunction1D>();
    RenderSettings settings = default_render_settings(vol);
    settings.method = method;
    if (a.iso) settings.iso_threshold = *a.iso;
    if (a.step) settings.step_mm = *a.step;
    settings.validate(&vol);

    Camera cam;
    if (a.camera.empty()) {
        const Vec3 ext = vol.spacing().cwiseProduct(Vec3(vol.dims()[0] - 1, vol.dims()[1] - 1, vol.dims()[2] - 1));
        cam = framing_camera(vol.center(), 0.5 * ext.norm(), w, h);
    } else {
        cam = read_json_file(a.camera).get<Camera>();
    }
    cam.width = w;
    cam.height = h;
    cam.validate();

    RenderOptions opts;
    opts.threads = a.threads;
    write_image(render(vol, tf, settings, cam, planes, {}, opts), a.out);
    return kExitOk;
}

// ---- slice ------------------------------------------------------------------

int cmd_slice(const std::string& volume, const std::string& plane_spec, const std::string& tf_path, bool colorize,
              const std::string& out) {
    SlicingPlane plane;
    try {
        plane = parse_plane_spec(plane_spec, "slice");
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("--plane: ") + e.what());
    }
    const auto loaded = load_volume(volume);
    const auto [lo, hi] = loaded.volume.value_range();
    const TransferFunction1D tf = tf_path.empty() ? preset_transfer_function("grayscale", lo, hi)
                                                  : read_json_file(tf_path).get<TransferFunction1D>();
    write_image(resample_view_plane(loaded.volume, plane, tf, colorize), out);
    return kExitOk;
}

// ---- register ---------------------------------------------------------------

int cmd_register(const std::string& source, const std::string& target, const std::string& out) {
    const auto src = read_json_file(source).get<LandmarkSet>();
    const auto dst = read_json_file(target).get<LandmarkSet>();
    const Json t = align(src, dst);
    write_text(out, t.dump(2));
    return kExitOk;
}

// ---- score ------------------------------------------------------------------

int cmd_score(const std::string& session_path, const std::string& needle, const std::string& acupoint) {
    const Session s = load_session(session_path);
    if (!s.model) throw Error(ErrorCode::InvalidArgument, "session has no anatomy model");
    const AnatomyModel model = load_model_manifest(resolve_ref(*s.model, session_path));
    std::optional<Volume> vol;
    if (s.volume) vol = load_volume(resolve_ref(*s.volume, session_path)).volume;
    const Json report = score_session(s, vol ? &*vol : nullptr, model, needle, acupoint);
    std::cout << report.dump() << '\n';
    return kExitOk;
}

// ---- serve ------------------------------------------------------------------

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

int cmd_serve(const std::string& bind, const std::string& data) {
    if (!fs::is_directory(data)) throw UsageError("--data must be an existing directory: " + data);
    std::pair<std::string, int> where;
    try {
        where = parse_bind_address(bind);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    Service service(data);
    HttpServer server(service);
    server.bind(where.first, where.second);
    std::cerr << "acudesk: serving " << fs::absolute(data).string() << " on http://" << where.first << ':'
              << server.port() << '\n';

    g_stop = false;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::jthread watcher([&server](std::stop_token st) {
        while (!st.stop_requested() && !g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(50));
        server.stop();
    });
    server.run();
    watcher.request_stop();
    return kExitOk;
}

// ---- convert / phantom ------------------------------------------------------

int cmd_convert(const std::string& in, const std::string& out, bool gzip) {
    const auto loaded = load_volume(in);
    for (const auto& w : loaded.warnings) std::cerr << "warning: " << w << '\n';
    write_nrrd(loaded.volume, out, gzip ? NrrdEncoding::Gzip : NrrdEncoding::Raw);
    return kExitOk;
}

int cmd_phantom(const std::string& kind, int n, double spacing, const std::string& out, bool gzip) {
    Volume v = [&] {
        if (kind == "shells") return shells_phantom(n, spacing);
        if (kind == "sphere") return sphere_distance_phantom(n, spacing, 0.35 * (n - 1) * spacing);
        if (kind == "ramp") return ramp_phantom({n, n, n}, Vec3::Constant(spacing), Vec3(1.0, 0.5, 0.25), 0.0);
        throw UsageError("--kind must be shells, sphere or ramp");
    }();
    write_nrrd(v, out, gzip ? NrrdEncoding::Gzip : NrrdEncoding::Raw);
    return kExitOk;
}

} // namespace

std::pair<int, int> parse_size(const std::string& text) {
    const auto x = text.find_first_of("xX");
    if (x == std::string::npos) throw std::invalid_argument("size must look like WxH: '" + text + "'");
    auto num = [](const std::string& s) {
        int v = 0;
        const auto* end = s.data() + s.size();
        const auto [p, ec] = std::from_chars(s.data(), end, v);
        if (ec != std::errc() || p != end || v < 1 || v > kMaxImageSide)
            throw std::invalid_argument("image side must be an integer in [1, " + std::to_string(kMaxImageSide) + "]");
        return v;
    };
    return {num(text.substr(0, x)), num(text.substr(x + 1))};
}

SlicingPlane parse_plane_spec(const std::string& spec, const std::string& id) {
    std::vector<std::string> parts;
    std::size_t i = 0;
    while (true) {
        const auto j = spec.find(':', i);
        parts.push_back(spec.substr(i, j == std::string::npos ? std::string::npos : j - i));
        if (j == std::string::npos) break;
        i = j + 1;
    }
    if (parts.size() != 3 && parts.size() != 4)
        throw std::invalid_argument("plane spec must be kind:px,py,pz:nx,ny,nz[:res], got '" + spec + "'");
    PlaneKind kind;
    if (parts[0] == "cutout") kind = PlaneKind::CutOut;
    else if (parts[0] == "view") kind = PlaneKind::View;
    else throw std::invalid_argument("plane kind must be cutout or view");
    const Vec3 pos = parse_triple(parts[1]);
    const Vec3 normal = parse_triple(parts[2]);
    if (!(normal.norm() > 0.0)) throw std::invalid_argument("plane normal must be non-zero");
    int res = 256;
    if (parts.size() == 4) {
        const double r = parse_double(parts[3]);
        if (r < 1 || r > kMaxImageSide || r != std::floor(r)) throw std::invalid_argument("bad plane resolution");
        res = static_cast<int>(r);
    }
    return SlicingPlane::from_normal(id, kind, pos, normal, 100.0, 100.0, res, res);
}

int run(int argc, const char* const* argv) {
    CLI::App app{"acudesk: volume rendering and needling practice toolkit"};
    app.require_subcommand(1);

    RenderArgs ra;
    auto* render_cmd = app.add_subcommand("render", "Ray-cast a volume to PNG or PPM");
    render_cmd->add_option("--volume", ra.volume, "NRRD file or DICOM directory")->required();
    render_cmd->add_option("--tf", ra.tf, "Transfer function JSON (default: grayscale preset)");
    render_cmd->add_option("--method", ra.method, "dvr, mip or iso")->default_str("dvr");
    render_cmd->add_option("--iso", ra.iso, "Iso-surface threshold");
    render_cmd->add_option("--step", ra.step, "Sampling step in mm");
    render_cmd->add_option("--camera", ra.camera, "Camera JSON");
    render_cmd->add_option("--size", ra.size, "Image size WxH")->default_str("512x512");
    render_cmd->add_option("--plane", ra.planes, "kind:px,py,pz:nx,ny,nz[:res], repeatable");
    render_cmd->add_option("--threads", ra.threads, "Worker threads (0 = all cores)");
    render_cmd->add_option("--out", ra.out, "Output image")->required();

    std::string sl_volume, sl_plane, sl_tf, sl_out;
    bool sl_color = false;
    auto* slice_cmd = app.add_subcommand("slice", "Resample one view plane");
    slice_cmd->add_option("--volume", sl_volume)->required();
    slice_cmd->add_option("--plane", sl_plane, "view:px,py,pz:nx,ny,nz[:res]")->required();
    slice_cmd->add_option("--tf", sl_tf);
    slice_cmd->add_flag("--color", sl_color, "Use the transfer-function colours");
    slice_cmd->add_option("--out", sl_out)->required();

    std::string rg_src, rg_dst, rg_out;
    auto* register_cmd = app.add_subcommand("register", "Align two landmark sets");
    register_cmd->add_option("--source-landmarks", rg_src)->required();
    register_cmd->add_option("--target-landmarks", rg_dst)->required();
    register_cmd->add_option("--out", rg_out)->required();

    std::string sc_session, sc_needle, sc_acupoint;
    auto* score_cmd = app.add_subcommand("score", "Score one needle of a saved session");
    score_cmd->add_option("--session", sc_session)->required();
    score_cmd->add_option("--needle", sc_needle)->required();
    score_cmd->add_option("--acupoint", sc_acupoint)->required();

    std::string sv_bind = "127.0.0.1:8080", sv_data;
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
    serve_cmd->add_option("--bind", sv_bind, "host:port")->default_str("127.0.0.1:8080");
    serve_cmd->add_option("--data", sv_data, "Data root with volumes/ and models/")->required();

    std::string cv_in, cv_out;
    bool cv_gzip = false;
    auto* convert_cmd = app.add_subcommand("convert", "Convert a DICOM series or NRRD file to NRRD");
    convert_cmd->add_option("--in", cv_in)->required();
    convert_cmd->add_option("--out", cv_out)->required();
    convert_cmd->add_flag("--gzip", cv_gzip);

    std::string ph_kind = "shells", ph_out;
    int ph_n = 128;
    double ph_spacing = 1.0;
    bool ph_gzip = false;
    auto* phantom_cmd = app.add_subcommand("phantom", "Write a synthetic test volume");
    phantom_cmd->add_option("--kind", ph_kind, "shells, sphere or ramp")->default_str("shells");
    phantom_cmd->add_option("--size", ph_n, "Voxels per axis")->default_str("128");
    phantom_cmd->add_option("--spacing", ph_spacing, "Voxel spacing in mm")->default_str("1");
    phantom_cmd->add_option("--out", ph_out)->required();
    phantom_cmd->add_flag("--gzip", ph_gzip);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*render_cmd) return cmd_render(ra);
        if (*slice_cmd) return cmd_slice(sl_volume, sl_plane, sl_tf, sl_color, sl_out);
        if (*register_cmd) return cmd_register(rg_src, rg_dst, rg_out);
        if (*score_cmd) return cmd_score(sc_session, sc_needle, sc_acupoint);
        if (*serve_cmd) return cmd_serve(sv_bind, sv_data);
        if (*convert_cmd) return cmd_convert(cv_in, cv_out, cv_gzip);
        if (*phantom_cmd) return cmd_phantom(ph_kind, ph_n, ph_spacing, ph_out, ph_gzip);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

} // namespace acudesk::cli

#include "acudesk/render.hpp"

#include "acudesk/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

namespace acudesk {

void RenderSettings::validate(const Volume* volume) const {
    if (!(step_mm > 0.0) || !std::isfinite(step_mm)) throw Error(ErrorCode::InvalidArgument, "step_mm must be > 0");
    if (!(early_termination_alpha > 0.0 && early_termination_alpha <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "early termination alpha must lie in (0, 1]");
    if (method == RenderMethod::IsoSurface && volume) {
        const auto [lo, hi] = volume->value_range();
        if (iso_threshold < lo || iso_threshold > hi)
            throw Error(ErrorCode::InvalidArgument, "iso threshold outside the volume value range");
    }
}

RenderSettings default_render_settings(const Volume& volume) {
    RenderSettings s;
    s.step_mm = 0.5 * volume.spacing().minCoeff();
    const auto [lo, hi] = volume.value_range();
    s.iso_threshold = 0.5 * (static_cast<double>(lo) + hi);
    return s;
}

namespace {

/// Flat view of a volume for the inner loops: index-space trilinear sampling
/// with the world→index affine folded in.
struct Sampler {
    const float* data = nullptr;
    int nx = 1, ny = 1, nz = 1;
    std::ptrdiff_t sy = 0, sz = 0;
    Mat3 world_to_index = Mat3::Identity(); // applied to (p - origin)
    Vec3 origin = Vec3::Zero();
    Mat3 index_gradient_to_world = Mat3::Identity();

    explicit Sampler(const Volume& v) {
        data = v.scalars().data();
        nx = v.dims()[0];
        ny = v.dims()[1];
        nz = v.dims()[2];
        sy = nx;
        sz = static_cast<std::ptrdiff_t>(nx) * ny;
        world_to_index = v.spacing().cwiseInverse().asDiagonal() * v.orientation().transpose();
        origin = v.origin();
        index_gradient_to_world = world_to_index.transpose();
    }

    Vec3 to_index(const Vec3& p) const { return world_to_index * (p - origin); }

    static constexpr double kEdgeTol = 1e-6;

    /// Trilinear value at a continuous index; 0 outside [0, n-1]^3.
    float at_index(double x, double y, double z) const {
        if (x < -kEdgeTol || y < -kEdgeTol || z < -kEdgeTol || x > nx - 1 + kEdgeTol || y > ny - 1 + kEdgeTol ||
            z > nz - 1 + kEdgeTol)
            return 0.0f;
        return interpolate(x, y, z);
    }

    /// Trilinear value with coordinates clamped into the lattice.
    float interpolate(double x, double y, double z) const {
        x = std::clamp(x, 0.0, static_cast<double>(nx - 1));
        y = std::clamp(y, 0.0, static_cast<double>(ny - 1));
        z = std::clamp(z, 0.0, static_cast<double>(nz - 1));
        int i = std::min(static_cast<int>(x), std::max(nx - 2, 0));
        int j = std::min(static_cast<int>(y), std::max(ny - 2, 0));
        int k = std::min(static_cast<int>(z), std::max(nz - 2, 0));
        const float fx = static_cast<float>(x - i);
        const float fy = static_cast<float>(y - j);
        const float fz = static_cast<float>(z - k);
        const std::ptrdiff_t dx = nx > 1 ? 1 : 0;
        const std::ptrdiff_t dy = ny > 1 ? sy : 0;
        const std::ptrdiff_t dz = nz > 1 ? sz : 0;
        const float* p = data + i + j * sy + k * sz;
        // a*(1-f) + b*f is exact at f = 0 and f = 1, so lattice points reproduce stored values.
        const float c00 = p[0] * (1.0f - fx) + p[dx] * fx;
        const float c10 = p[dy] * (1.0f - fx) + p[dy + dx] * fx;
        const float c01 = p[dz] * (1.0f - fx) + p[dz + dx] * fx;
        const float c11 = p[dz + dy] * (1.0f - fx) + p[dz + dy + dx] * fx;
        const float c0 = c00 * (1.0f - fy) + c10 * fy;
        const float c1 = c01 * (1.0f - fy) + c11 * fy;
        return c0 * (1.0f - fz) + c1 * fz;
    }

    float at_world(const Vec3& p) const {
        const Vec3 idx = to_index(p);
        return at_index(idx.x(), idx.y(), idx.z());
    }

    Vec3 gradient_index(double x, double y, double z) const {
        return {0.5 * (at_index(x + 1, y, z) - at_index(x - 1, y, z)),
                0.5 * (at_index(x, y + 1, z) - at_index(x, y - 1, z)),
                0.5 * (at_index(x, y, z + 1) - at_index(x, y, z - 1))};
    }

    Vec3 gradient_world(const Vec3& idx) const {
        return index_gradient_to_world * gradient_index(idx.x(), idx.y(), idx.z());
    }
};

std::optional<std::pair<double, double>> box_interval(const Sampler& s, const Vec3& o_idx, const Vec3& d_idx) {
    double t0 = 0.0;
    double t1 = std::numeric_limits<double>::infinity();
    const double hi[3] = {static_cast<double>(s.nx - 1), static_cast<double>(s.ny - 1), static_cast<double>(s.nz - 1)};
    for (int a = 0; a < 3; ++a) {
        if (std::abs(d_idx[a]) < 1e-15) {
            if (o_idx[a] < -Sampler::kEdgeTol || o_idx[a] > hi[a] + Sampler::kEdgeTol) return std::nullopt;
            continue;
        }
        double ta = (0.0 - o_idx[a]) / d_idx[a];
        double tb = (hi[a] - o_idx[a]) / d_idx[a];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
    }
    if (t1 < t0) return std::nullopt;
    return std::make_pair(t0, t1);
}

/// Contrast stage plus LUT lookup with linear interpolation between entries.
struct Classifier {
    TransferFunction1D tf;
    std::pair<double, double> range;
    std::vector<Rgba> raw;       // straight colour + opacity
    std::vector<Rgba> corrected; // premultiplied by step-corrected opacity, alpha = corrected opacity
    float scale = 0.0f;

    Classifier(const TransferFunction1D& t, const Volume& volume, double step_mm) : tf(t) {
        range = {volume.value_range().first, volume.value_range().second};
        const Lut lut = build_lut(tf, kDefaultLutResolution);
        raw = lut.entries;
        corrected.resize(raw.size());
        const double exponent = step_mm / 1.0; // opacities are specified per millimetre
        for (std::size_t i = 0; i < raw.size(); ++i) {
            const double a = raw[i][3];
            const auto ac = static_cast<float>(1.0 - std::pow(1.0 - a, exponent));
            corrected[i] = {raw[i][0] * ac, raw[i][1] * ac, raw[i][2] * ac, ac};
        }
        scale = static_cast<float>(lut.resolution - 1);
    }

    double normalize(float v) const { return normalized_intensity(tf, v, range); }

    static Rgba lookup(const std::vector<Rgba>& table, float scale, double q) {
        const float x = static_cast<float>(q) * scale;
        const int i = std::min(static_cast<int>(x), static_cast<int>(table.size()) - 2);
        const float f = x - static_cast<float>(i);
        const Rgba& a = table[static_cast<std::size_t>(i)];
        const Rgba& b = table[static_cast<std::size_t>(i) + 1];
        return {a[0] * (1.0f - f) + b[0] * f, a[1] * (1.0f - f) + b[1] * f, a[2] * (1.0f - f) + b[2] * f,
                a[3] * (1.0f - f) + b[3] * f};
    }

    Rgba corrected_at(float v) const { return lookup(corrected, scale, normalize(v)); }
    Rgba raw_at(double v) const { return lookup(raw, scale, normalize(static_cast<float>(v))); }
};

struct FrameContext {
    const Volume& volume;
    const RenderSettings& settings;
    const Camera& camera;
    std::vector<SlicingPlane> cutouts;
    Sampler sampler;
    Classifier classifier;
    Vec3 right, up, forward;
    double tan_half = 0.0;
    double aspect = 1.0;

    FrameContext(const Volume& v, const TransferFunction1D& tf, const RenderSettings& s, const Camera& c,
                 const std::vector<SlicingPlane>& planes)
        : volume(v), settings(s), camera(c), sampler(v), classifier(tf, v, s.step_mm) {
        for (const auto& p : planes) {
            if (p.kind == PlaneKind::CutOut) cutouts.push_back(p);
        }
        camera.basis(right, up, forward);
        tan_half = std::tan(camera.vertical_fov * std::numbers::pi / 360.0);
        aspect = static_cast<double>(camera.width) / camera.height;
    }

    bool clipped(const Vec3& o, const Vec3& d, double t) const {
        if (cutouts.empty()) return false;
        return !clip(o + t * d, cutouts);
    }
};

float headlight(const Vec3& gradient_world, const Vec3& ray_dir) {
    const double g = gradient_world.norm();
    // Homogeneous regions have no surface orientation; leave them unshaded.
    if (g < 1e-12) return 1.0f;
    const Vec3 n = -gradient_world / g;
    return static_cast<float>(std::max(0.0, n.dot(-ray_dir)));
}

struct PixelResult {
    Rgba color;
    float depth; // along camera forward; +inf when nothing was hit
};

PixelResult shade_dvr(const FrameContext& fc, const Ray& ray) {
    const Rgba& bg = fc.settings.background;
    const Vec3 o_idx = fc.sampler.to_index(ray.origin);
    const Vec3 d_idx = fc.sampler.world_to_index * ray.direction;
    const auto span = box_interval(fc.sampler, o_idx, d_idx);
    constexpr float inf = std::numeric_limits<float>::infinity();
    if (!span) return {bg, inf};

    const double step = fc.settings.step_mm;
    const double forward_scale = ray.direction.dot(fc.forward);
    const auto early = static_cast<float>(fc.settings.early_termination_alpha);
    const bool lit = fc.settings.lighting_enabled;
    float cr = 0.0f, cg = 0.0f, cb = 0.0f, acc = 0.0f;
    float depth = inf;
    const auto [t0, t1] = *span;
    for (long k = 0;; ++k) {
        const double t = t0 + static_cast<double>(k) * step;
        if (t > t1) break;
        if (fc.clipped(ray.origin, ray.direction, t)) continue;
        const double x = o_idx.x() + t * d_idx.x();
        const double y = o_idx.y() + t * d_idx.y();
        const double z = o_idx.z() + t * d_idx.z();
        const float v = fc.sampler.interpolate(x, y, z);
        const Rgba c = fc.classifier.corrected_at(v);
        if (c[3] <= 0.0f) continue;
        float light = 1.0f;
        if (lit) light = headlight(fc.sampler.index_gradient_to_world * fc.sampler.gradient_index(x, y, z), ray.direction);
        const float w = 1.0f - acc;
        cr += w * c[0] * light;
        cg += w * c[1] * light;
        cb += w * c[2] * light;
        acc += w * c[3];
        if (depth == inf && acc >= 0.5f) depth = static_cast<float>(t * forward_scale);
        if (acc >= early) break;
    }
    return {over_background({cr, cg, cb, acc}, bg), depth};
}

PixelResult shade_mip(const FrameContext& fc, const Ray& ray) {
    const Rgba& bg = fc.settings.background;
    const Vec3 o_idx = fc.sampler.to_index(ray.origin);
    const Vec3 d_idx = fc.sampler.world_to_index * ray.direction;
    const auto span = box_interval(fc.sampler, o_idx, d_idx);
    constexpr float inf = std::numeric_limits<float>::infinity();
    if (!span) return {bg, inf};
    const auto [t0, t1] = *span;
    float best = -std::numeric_limits<float>::infinity();
    double best_t = 0.0;
    bool any = false;
    for (long k = 0;; ++k) {
        const double t = t0 + static_cast<double>(k) * fc.settings.step_mm;
        if (t > t1) break;
        if (fc.clipped(ray.origin, ray.direction, t)) continue;
        const float v = fc.sampler.interpolate(o_idx.x() + t * d_idx.x(), o_idx.y() + t * d_idx.y(),
                                               o_idx.z() + t * d_idx.z());
        if (!any || v > best) {
            best = v;
            best_t = t;
            any = true;
        }
    }
    if (!any) return {bg, inf};
    const Rgba c = fc.classifier.raw_at(best);
    const Rgba premult{c[0] * c[3], c[1] * c[3], c[2] * c[3], c[3]};
    const float depth = c[3] > 0.0f ? static_cast<float>(best_t * ray.direction.dot(fc.forward)) : inf;
    return {over_background(premult, bg), depth};
}

PixelResult shade_iso(const FrameContext& fc, const Ray& ray) {
    constexpr float inf = std::numeric_limits<float>::infinity();
    const auto hit = iso_hit(ray, fc.volume, fc.settings.iso_threshold, fc.settings.step_mm, fc.cutouts);
    if (!hit) return {fc.settings.background, inf};
    const Rgba c = fc.classifier.raw_at(fc.settings.iso_threshold);
    float light = 1.0f;
    if (fc.settings.lighting_enabled) light = static_cast<float>(std::max(0.0, hit->normal.dot(-ray.direction)));
    return {{c[0] * light, c[1] * light, c[2] * light, 1.0f},
            static_cast<float>(hit->distance * ray.direction.dot(fc.forward))};
}

// ---- overlay rasterisation -------------------------------------------------

struct Projected {
    double x = 0.0; // continuous pixel coordinates, pixel centres at +0.5
    double y = 0.0;
    double z = 0.0; // view depth
};

class OverlayRaster {
public:
    OverlayRaster(const FrameContext& fc, Image& image, std::vector<float>& depth)
        : fc_(fc), image_(image), depth_(depth) {}

    std::optional<Projected> project(const Vec3& p) const {
        const Vec3 rel = p - fc_.camera.position;
        const double z = rel.dot(fc_.forward);
        if (z <= kNear) return std::nullopt;
        return project_view(rel.dot(fc_.right), rel.dot(fc_.up), z);
    }

    void triangle(const Vec3& a, const Vec3& b, const Vec3& c, const Rgb& color) {
        const auto pa = project(a), pb = project(b), pc = project(c);
        if (!pa || !pb || !pc) return;
        Vec3 n = (b - a).cross(c - a);
        if (n.norm() == 0.0) return;
        n.normalize();
        const float shade = static_cast<float>(0.25 + 0.75 * std::abs(n.dot(fc_.forward)));
        const double area = edge(*pa, *pb, pc->x, pc->y);
        if (area == 0.0) return;
        const int x0 = std::max(0, static_cast<int>(std::floor(std::min({pa->x, pb->x, pc->x}))));
        const int x1 = std::min(image_.width - 1, static_cast<int>(std::ceil(std::max({pa->x, pb->x, pc->x}))));
        const int y0 = std::max(0, static_cast<int>(std::floor(std::min({pa->y, pb->y, pc->y}))));
        const int y1 = std::min(image_.height - 1, static_cast<int>(std::ceil(std::max({pa->y, pb->y, pc->y}))));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const double px = x + 0.5, py = y + 0.5;
                const double w0 = edge(*pb, *pc, px, py) / area;
                const double w1 = edge(*pc, *pa, px, py) / area;
                const double w2 = edge(*pa, *pb, px, py) / area;
                if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
                const double inv_z = w0 / pa->z + w1 / pb->z + w2 / pc->z;
                plot(x, y, 1.0 / inv_z, {color[0] * shade, color[1] * shade, color[2] * shade});
            }
        }
    }

    void segment(Vec3 a, Vec3 b, const Rgb& color, int thickness) {
        // Clip against the near plane in view space.
        const double za = (a - fc_.camera.position).dot(fc_.forward);
        const double zb = (b - fc_.camera.position).dot(fc_.forward);
        if (za <= kNear && zb <= kNear) return;
        if (za <= kNear) a = a + (b - a) * ((kNear * 1.001 - za) / (zb - za));
        if (zb <= kNear) b = b + (a - b) * ((kNear * 1.001 - zb) / (za - zb));
        const auto pa = project(a), pb = project(b);
        if (!pa || !pb) return;
        const double dx = pb->x - pa->x, dy = pb->y - pa->y;
        const int steps = std::max(1, static_cast<int>(std::ceil(std::max(std::abs(dx), std::abs(dy)))));
        if (steps > 4 * (image_.width + image_.height)) return; // degenerate projection
        const int r = std::max(0, (thickness - 1) / 2);
        for (int s = 0; s <= steps; ++s) {
            const double f = static_cast<double>(s) / steps;
            const double inv_z = (1.0 - f) / pa->z + f / pb->z;
            const int cx = static_cast<int>(std::floor(pa->x + f * dx));
            const int cy = static_cast<int>(std::floor(pa->y + f * dy));
            for (int oy = -r; oy <= r; ++oy)
                for (int ox = -r; ox <= r; ++ox) plot(cx + ox, cy + oy, 1.0 / inv_z, color);
        }
    }

    void point(const Vec3& p, const Rgb& color, int radius) {
        const auto pp = project(p);
        if (!pp) return;
        const int cx = static_cast<int>(std::floor(pp->x));
        const int cy = static_cast<int>(std::floor(pp->y));
        for (int oy = -radius; oy <= radius; ++oy)
            for (int ox = -radius; ox <= radius; ++ox)
                if (ox * ox + oy * oy <= radius * radius) plot(cx + ox, cy + oy, pp->z, color);
    }

private:
    static constexpr double kNear = 1e-3;

    Projected project_view(double vx, double vy, double z) const {
        const double ndc_x = vx / (z * fc_.tan_half * fc_.aspect);
        const double ndc_y = vy / (z * fc_.tan_half);
        return {(ndc_x + 1.0) * 0.5 * image_.width, (1.0 - ndc_y) * 0.5 * image_.height, z};
    }

    static double edge(const Projected& a, const Projected& b, double px, double py) {
        return (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
    }

    void plot(int x, int y, double z, const Rgb& color) {
        if (x < 0 || y < 0 || x >= image_.width || y >= image_.height) return;
        float& d = depth_[static_cast<std::size_t>(y) * image_.width + x];
        if (!(z < d)) return;
        d = static_cast<float>(z);
        image_.at(x, y) = {color[0], color[1], color[2], 1.0f};
    }

    const FrameContext& fc_;
    Image& image_;
    std::vector<float>& depth_;
};

void check_image_size(int w, int h) {
    if (w < 1 || h < 1 || w > kMaxImageSide || h > kMaxImageSide)
        throw Error(ErrorCode::InvalidArgument, "image size must lie within 1.." + std::to_string(kMaxImageSide));
}

} // namespace

float sample(const Volume& volume, const Vec3& p) { return Sampler(volume).at_world(p); }

Vec3 gradient(const Volume& volume, const Vec3& p) {
    const Sampler s(volume);
    return s.gradient_world(s.to_index(p));
}

Rgba composite_dvr(std::span<const DvrSample> samples, double early_termination_alpha) {
    float cr = 0.0f, cg = 0.0f, cb = 0.0f, acc = 0.0f;
    const auto early = static_cast<float>(early_termination_alpha);
    for (const auto& s : samples) {
        if (acc >= early) break;
        const float w = 1.0f - acc;
        const float a = s.rgba[3];
        cr += w * a * s.rgba[0] * s.lighting;
        cg += w * a * s.rgba[1] * s.lighting;
        cb += w * a * s.rgba[2] * s.lighting;
        acc += w * a;
    }
    return {cr, cg, cb, acc};
}

Rgba over_background(const Rgba& front, const Rgba& background) {
    const float w = 1.0f - front[3];
    return {front[0] + w * background[0], front[1] + w * background[1], front[2] + w * background[2],
            front[3] + w * background[3]};
}

std::optional<float> mip(std::span<const float> samples) {
    if (samples.empty()) return std::nullopt;
    return *std::max_element(samples.begin(), samples.end());
}

std::optional<std::pair<double, double>> intersect_volume_box(const Volume& volume, const Ray& ray) {
    const Sampler s(volume);
    return box_interval(s, s.to_index(ray.origin), s.world_to_index * ray.direction);
}

std::optional<IsoHit> iso_hit(const Ray& ray, const Volume& volume, double threshold, double step_mm,
                              const std::vector<SlicingPlane>& cutout_planes) {
    const Sampler s(volume);
    const Vec3 o_idx = s.to_index(ray.origin);
    const Vec3 d_idx = s.world_to_index * ray.direction;
    const auto span = box_interval(s, o_idx, d_idx);
    if (!span) return std::nullopt;
    const auto [t0, t1] = *span;

    auto value = [&](double t) -> double {
        if (!cutout_planes.empty() && !clip(ray.origin + t * ray.direction, cutout_planes))
            return -std::numeric_limits<double>::infinity();
        return s.interpolate(o_idx.x() + t * d_idx.x(), o_idx.y() + t * d_idx.y(), o_idx.z() + t * d_idx.z());
    };
    auto make_hit = [&](double t) {
        const Vec3 p = ray.origin + t * ray.direction;
        Vec3 g = s.gradient_world(o_idx + t * d_idx);
        Vec3 n = g.norm() > 1e-12 ? Vec3(-g.normalized()) : Vec3(-ray.direction);
        return IsoHit{p, n, t};
    };

    double prev_t = t0;
    if (value(t0) > threshold) return make_hit(t0);
    for (long k = 1;; ++k) {
        double t = t0 + static_cast<double>(k) * step_mm;
        const bool last = t >= t1;
        if (last) t = t1;
        if (value(t) > threshold) {
            double lo = prev_t, hi = t;
            for (int i = 0; i < 8; ++i) {
                const double mid = 0.5 * (lo + hi);
                (value(mid) > threshold ? hi : lo) = mid;
            }
            return make_hit(0.5 * (lo + hi));
        }
        if (last) break;
        prev_t = t;
    }
    return std::nullopt;
}

Image render_with_depth(const Volume& volume, const TransferFunction1D& tf, const RenderSettings& settings,
                        const Camera& camera, const std::vector<SlicingPlane>& planes, const Overlays& overlays,
                        const RenderOptions& options, DepthImage* depth_out) {
    check_image_size(camera.width, camera.height);
    camera.validate();
    settings.validate(&volume);
    tf.validate();
    for (const auto& p : planes) p.validate();

    const FrameContext fc(volume, tf, settings, camera, planes);
    Image image(camera.width, camera.height);
    std::vector<float> depth(image.pixels.size(), std::numeric_limits<float>::infinity());

    const int tile = std::max(1, options.tile_size);
    const int tiles_x = (camera.width + tile - 1) / tile;
    const int tiles_y = (camera.height + tile - 1) / tile;
    const int tile_count = tiles_x * tiles_y;

    auto render_tile = [&](int index) {
        const int tx = index % tiles_x;
        const int ty = index / tiles_x;
        const int x_end = std::min(camera.width, (tx + 1) * tile);
        const int y_end = std::min(camera.height, (ty + 1) * tile);
        for (int y = ty * tile; y < y_end; ++y) {
            for (int x = tx * tile; x < x_end; ++x) {
                const Ray ray = camera.ray_for_pixel(x, y);
                PixelResult r{};
                switch (settings.method) {
                case RenderMethod::DVR: r = shade_dvr(fc, ray); break;
                case RenderMethod::MIP: r = shade_mip(fc, ray); break;
                case RenderMethod::IsoSurface: r = shade_iso(fc, ray); break;
                }
                const std::size_t idx = static_cast<std::size_t>(y) * camera.width + x;
                image.pixels[idx] = r.color;
                depth[idx] = r.depth;
            }
        }
    };

    int threads = options.threads > 0 ? options.threads : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::clamp(threads, 1, tile_count);
    if (threads == 1) {
        for (int i = 0; i < tile_count; ++i) render_tile(i);
    } else {
        std::atomic<int> next{0};
        std::vector<std::jthread> workers;
        workers.reserve(static_cast<std::size_t>(threads));
        for (int w = 0; w < threads; ++w) {
            workers.emplace_back([&] {
                for (int i = next.fetch_add(1); i < tile_count; i = next.fetch_add(1)) render_tile(i);
            });
        }
    }

    OverlayRaster raster(fc, image, depth);
    for (const auto& m : overlays.meshes) {
        if (!m.mesh) continue;
        std::vector<Vec3> world;
        world.reserve(m.mesh->vertices.size());
        for (const auto& v : m.mesh->vertices) world.push_back(m.pose * v);
        for (const auto& t : m.mesh->triangles) raster.triangle(world[t[0]], world[t[1]], world[t[2]], m.color);
    }
    for (const auto& s : overlays.segments) raster.segment(s.a, s.b, s.color, s.thickness_px);
    for (const auto& p : overlays.points) raster.point(p.position, p.color, p.radius_px);

    if (depth_out) *depth_out = DepthImage{camera.width, camera.height, std::move(depth)};
    return image;
}

Image render(const Volume& volume, const TransferFunction1D& tf, const RenderSettings& settings,
             const Camera& camera, const std::vector<SlicingPlane>& planes, const Overlays& overlays,
             const RenderOptions& options) {
    return render_with_depth(volume, tf, settings, camera, planes, overlays, options, nullptr);
}

Vec3 plane_pixel_world(const SlicingPlane& plane, int i, int j) {
    const double u = (static_cast<double>(i) + 0.5) / plane.resolution_u * plane.extent_u - 0.5 * plane.extent_u;
    const double v = 0.5 * plane.extent_v - (static_cast<double>(j) + 0.5) / plane.resolution_v * plane.extent_v;
    return plane.position + u * plane.axis_u + v * plane.axis_v;
}

Eigen::Vector2d plane_local_to_pixel(const SlicingPlane& plane, const Eigen::Vector2d& uv) {
    return {(uv.x() + 0.5 * plane.extent_u) / plane.extent_u * plane.resolution_u,
            (0.5 * plane.extent_v - uv.y()) / plane.extent_v * plane.resolution_v};
}

std::vector<float> resample_plane_scalars(const Volume& volume, const SlicingPlane& plane) {
    plane.validate();
    check_image_size(plane.resolution_u, plane.resolution_v);
    const Sampler s(volume);
    std::vector<float> out(static_cast<std::size_t>(plane.resolution_u) * plane.resolution_v);
    for (int j = 0; j < plane.resolution_v; ++j)
        for (int i = 0; i < plane.resolution_u; ++i)
            out[static_cast<std::size_t>(j) * plane.resolution_u + i] = s.at_world(plane_pixel_world(plane, i, j));
    return out;
}

Image resample_view_plane(const Volume& volume, const SlicingPlane& plane, const TransferFunction1D& tf,
                          bool colorize) {
    tf.validate();
    const auto scalars = resample_plane_scalars(volume, plane);
    const std::pair<double, double> range{volume.value_range().first, volume.value_range().second};
    Image img(plane.resolution_u, plane.resolution_v);
    for (std::size_t i = 0; i < scalars.size(); ++i) {
        const double q = normalized_intensity(tf, scalars[i], range);
        if (colorize) {
            const Rgba c = classify(tf, q);
            img.pixels[i] = {c[0], c[1], c[2], 1.0f};
        } else {
            const auto g = static_cast<float>(q);
            img.pixels[i] = {g, g, g, 1.0f};
        }
    }
    return img;
}

} // namespace acudesk

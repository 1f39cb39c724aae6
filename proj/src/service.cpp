#include "acudesk/service.hpp"

#include "acudesk/digest.hpp"
#include "acudesk/image.hpp"
#include "acudesk/io.hpp"
#include "acudesk/json.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <charconv>

namespace acudesk {

std::string_view to_string(ApiErrorCode code) noexcept {
    switch (code) {
    case ApiErrorCode::BadRequest: return "bad_request";
    case ApiErrorCode::NotFound: return "not_found";
    case ApiErrorCode::Conflict: return "conflict";
    case ApiErrorCode::Unsupported: return "unsupported";
    case ApiErrorCode::Internal: return "internal";
    }
    return "internal";
}

int http_status(ApiErrorCode code) noexcept {
    switch (code) {
    case ApiErrorCode::BadRequest: return 400;
    case ApiErrorCode::NotFound: return 404;
    case ApiErrorCode::Conflict: return 409;
    case ApiErrorCode::Unsupported: return 415;
    case ApiErrorCode::Internal: return 500;
    }
    return 500;
}

Json ApiError::to_json() const {
    Json j{{"code", std::string(to_string(code))}, {"message", message}};
    if (detail) j["detail"] = *detail;
    return j;
}

ApiError to_api_error(const Error& e) {
    ApiErrorCode code = ApiErrorCode::BadRequest;
    switch (e.code()) {
    case ErrorCode::UnknownId:
    case ErrorCode::UnknownLayer: code = ApiErrorCode::NotFound; break;
    case ErrorCode::Conflict: code = ApiErrorCode::Conflict; break;
    case ErrorCode::UnsupportedFormat:
    case ErrorCode::UnsupportedVersion: code = ApiErrorCode::Unsupported; break;
    case ErrorCode::IoError: code = ApiErrorCode::Internal; break;
    default: break;
    }
    return {code, e.what(), std::string(to_string(e.code()))};
}

std::optional<std::string> ApiRequest::header(std::string_view name) const {
    auto lower = [](std::string_view s) {
        std::string out(s);
        std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
        return out;
    };
    const std::string want = lower(name);
    for (const auto& [k, v] : headers) {
        if (lower(k) == want) return v;
    }
    return std::nullopt;
}

std::vector<CatalogEntry> scan_catalog(const std::filesystem::path& data_root) {
    namespace fs = std::filesystem;
    std::vector<CatalogEntry> out;
    std::error_code ec;
    if (const auto dir = data_root / "volumes"; fs::is_directory(dir, ec)) {
        for (const auto& e : fs::directory_iterator(dir)) {
            const auto ext = e.path().extension().string();
            if (e.is_directory()) out.push_back({e.path().filename().string(), e.path(), "dicom"});
            else if (ext == ".nrrd" || ext == ".nhdr") out.push_back({e.path().stem().string(), e.path(), "nrrd"});
        }
    }
    if (const auto dir = data_root / "models"; fs::is_directory(dir, ec)) {
        for (const auto& e : fs::directory_iterator(dir)) {
            if (e.is_directory() && fs::is_regular_file(e.path() / "model.json"))
                out.push_back({e.path().filename().string(), e.path() / "model.json", "model"});
            else if (e.is_regular_file() && e.path().extension() == ".json")
                out.push_back({e.path().stem().string(), e.path(), "model"});
        }
    }
    std::sort(out.begin(), out.end(), [](const CatalogEntry& a, const CatalogEntry& b) {
        return std::tie(a.kind, a.name) < std::tie(b.kind, b.name);
    });
    return out;
}

// ---- Service ----------------------------------------------------------------

struct Service::Entry {
    std::mutex writer;                      // one mutation at a time
    mutable std::mutex snapshot_mutex;      // protects `current` only
    std::shared_ptr<const Session> current;
    std::shared_ptr<const Volume> volume;
    std::shared_ptr<const AnatomyModel> model;

    std::shared_ptr<const Session> load() const {
        std::lock_guard lock(snapshot_mutex);
        return current;
    }
    void store(std::shared_ptr<const Session> s) {
        std::lock_guard lock(snapshot_mutex);
        current = std::move(s);
    }
};

namespace {

[[noreturn]] void fail(ApiErrorCode code, const std::string& message) {
    // Carried through Error so one catch site formats every failure.
    switch (code) {
    case ApiErrorCode::NotFound: throw Error(ErrorCode::UnknownId, message);
    case ApiErrorCode::Conflict: throw Error(ErrorCode::Conflict, message);
    case ApiErrorCode::Unsupported: throw Error(ErrorCode::UnsupportedFormat, message);
    default: throw Error(ErrorCode::InvalidArgument, message);
    }
}

ApiResponse json_response(const Json& j, int status = 200) {
    ApiResponse r;
    r.status = status;
    r.body = j.dump();
    return r;
}

ApiResponse error_response(const ApiError& e) {
    ApiResponse r = json_response(e.to_json(), http_status(e.code));
    return r;
}

ApiResponse png_response(const Image& img, std::uint64_t revision) {
    const auto bytes = encode_png(img);
    ApiResponse r;
    r.content_type = "image/png";
    r.body.assign(bytes.begin(), bytes.end());
    r.headers[kRevisionHeader] = std::to_string(revision);
    return r;
}

std::optional<long long> parse_int(const std::string& s) {
    long long v = 0;
    const auto* end = s.data() + s.size();
    const auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end) return std::nullopt;
    return v;
}

long long int_param(const ApiRequest& req, const std::string& name, long long fallback) {
    const auto it = req.query.find(name);
    if (it == req.query.end()) return fallback;
    const auto v = parse_int(it->second);
    if (!v) fail(ApiErrorCode::BadRequest, "query parameter '" + name + "' must be an integer");
    return *v;
}

std::string string_param(const ApiRequest& req, const std::string& name) {
    const auto it = req.query.find(name);
    if (it == req.query.end() || it->second.empty())
        fail(ApiErrorCode::BadRequest, "missing query parameter '" + name + "'");
    return it->second;
}

std::pair<int, int> image_size(const ApiRequest& req, int fallback) {
    const long long w = int_param(req, "w", fallback);
    const long long h = int_param(req, "h", fallback);
    if (w < 1 || h < 1 || w > kMaxServiceImageSide || h > kMaxServiceImageSide)
        fail(ApiErrorCode::BadRequest, "image size must lie in [1, " + std::to_string(kMaxServiceImageSide) + "]");
    return {static_cast<int>(w), static_cast<int>(h)};
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::size_t i = 0;
    while (i < path.size()) {
        const auto j = path.find('/', i);
        const auto end = j == std::string::npos ? path.size() : j;
        if (end > i) parts.push_back(path.substr(i, end - i));
        i = end + 1;
    }
    return parts;
}

Json parse_body(const ApiRequest& req) {
    if (const auto ct = req.header("Content-Type");
        ct && !ct->empty() && ct->find("application/json") == std::string::npos)
        fail(ApiErrorCode::Unsupported, "request body must be application/json");
    return parse_json(req.body);
}

} // namespace

Service::Service(std::filesystem::path data_root) : data_root_(std::move(data_root)) {
    std::error_code ec;
    if (!std::filesystem::is_directory(data_root_, ec))
        throw Error(ErrorCode::InvalidArgument, "data root is not a directory: " + data_root_.string());
}

Service::~Service() = default;

std::shared_ptr<const Session> Service::snapshot(const std::string& session_id) const {
    const auto e = entry(session_id);
    return e ? e->load() : nullptr;
}

std::shared_ptr<Service::Entry> Service::entry(const std::string& id) const {
    std::lock_guard lock(mutex_);
    const auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

ApiResponse Service::handle(const ApiRequest& request) {
    try {
        return route(request);
    } catch (const Error& e) {
        return error_response(to_api_error(e));
    } catch (const std::exception& e) {
        return error_response({ApiErrorCode::Internal, e.what(), std::nullopt});
    }
}

ApiResponse Service::route(const ApiRequest& req) {
    const auto p = split_path(req.path);
    const bool get = req.method == "GET";
    const bool post = req.method == "POST";
    auto session_id = [&]() -> const std::string& {
        if (!entry(p[1])) fail(ApiErrorCode::NotFound, "no session '" + p[1] + "'");
        return p[1];
    };

    if (p.size() == 1 && p[0] == "health" && get) return json_response({{"status", "ok"}});
    if (p.size() == 1 && p[0] == "volumes" && get) return get_volumes();
    if (p.size() == 1 && p[0] == "sessions" && post) return post_session(req);
    if (p.size() == 1 && p[0] == "sessions" && get) {
        std::lock_guard lock(mutex_);
        Json ids = Json::array();
        for (const auto& [id, _] : sessions_) ids.push_back(id);
        return json_response({{"sessions", ids}});
    }
    if (p.size() >= 2 && p[0] == "sessions") {
        if (p.size() == 2 && get) return get_session(session_id());
        if (p.size() == 3 && p[2] == "commands" && post) return post_command(session_id(), req);
        if (p.size() == 3 && p[2] == "frame" && get) return get_frame(session_id(), req);
        if (p.size() == 3 && p[2] == "histogram" && get) return get_histogram(session_id(), req);
        if (p.size() == 3 && p[2] == "score" && get) return get_score(session_id(), req);
        if (p.size() == 5 && p[2] == "planes" && p[4] == "slice" && get) return get_slice(session_id(), p[3], req);
    }
    return error_response({ApiErrorCode::NotFound, "no route for " + req.method + " " + req.path, std::nullopt});
}

ApiResponse Service::get_volumes() {
    Json volumes = Json::array();
    Json models = Json::array();
    for (const auto& e : scan_catalog(data_root_)) {
        Json item{{"name", e.name},
                  {"path", std::filesystem::relative(e.path, data_root_).generic_string()},
                  {"format", e.kind}};
        (e.kind == "model" ? models : volumes).push_back(item);
    }
    return json_response({{"volumes", volumes}, {"models", models}});
}

std::shared_ptr<const Volume> Service::volume_for(const std::filesystem::path& path,
                                                  std::vector<std::string>* warnings) {
    const std::string key = path.string();
    {
        std::lock_guard lock(mutex_);
        if (const auto it = volumes_.find(key); it != volumes_.end()) return it->second;
    }
    auto loaded = load_volume(path);
    if (warnings) *warnings = loaded.warnings;
    auto v = std::make_shared<const Volume>(std::move(loaded.volume));
    std::lock_guard lock(mutex_);
    return volumes_.emplace(key, v).first->second;
}

std::shared_ptr<const AnatomyModel> Service::model_for(const std::filesystem::path& path) {
    const std::string key = path.string();
    {
        std::lock_guard lock(mutex_);
        if (const auto it = models_.find(key); it != models_.end()) return it->second;
    }
    auto m = std::make_shared<const AnatomyModel>(load_model_manifest(path));
    std::lock_guard lock(mutex_);
    return models_.emplace(key, m).first->second;
}

ApiResponse Service::post_session(const ApiRequest& req) {
    const Json body = parse_body(req);
    if (!body.is_object() || !body.contains("volume") || !body.at("volume").is_string())
        fail(ApiErrorCode::BadRequest, "body must be {\"volume\": name, \"model\": name?}");
    const auto catalog = scan_catalog(data_root_);
    auto find = [&](const std::string& name, bool model) -> const CatalogEntry& {
        for (const auto& e : catalog) {
            if (e.name == name && (e.kind == "model") == model) return e;
        }
        fail(ApiErrorCode::NotFound, std::string(model ? "no model '" : "no volume '") + name + "'");
    };

    const auto& vol_entry = find(body.at("volume").get<std::string>(), false);
    std::vector<std::string> warnings;
    auto volume = volume_for(vol_entry.path, &warnings);

    std::shared_ptr<const AnatomyModel> model;
    std::optional<ContentRef> model_ref;
    if (body.contains("model") && !body.at("model").is_null()) {
        if (!body.at("model").is_string()) fail(ApiErrorCode::BadRequest, "\"model\" must be a string");
        const auto& m = find(body.at("model").get<std::string>(), true);
        model = model_for(m.path);
        model_ref = ContentRef{std::filesystem::absolute(m.path).string(), sha256_path(m.path)};
    }
    const ContentRef volume_ref{std::filesystem::absolute(vol_entry.path).string(), sha256_path(vol_entry.path)};

    auto e = std::make_shared<Entry>();
    e->volume = volume;
    e->model = model;
    std::string id;
    {
        std::lock_guard lock(mutex_);
        id = "s" + std::to_string(next_id_++);
        e->current = std::make_shared<const Session>(create_session(id, *volume, volume_ref, model.get(), model_ref));
        sessions_[id] = e;
    }
    ApiResponse r = json_response({{"id", id}, {"revision", 0}, {"warnings", warnings}}, 201);
    r.headers[kRevisionHeader] = "0";
    return r;
}

ApiResponse Service::get_session(const std::string& id) {
    const auto s = entry(id)->load();
    ApiResponse r = json_response(session_to_json(*s));
    r.headers[kRevisionHeader] = std::to_string(s->revision);
    return r;
}

ApiResponse Service::post_command(const std::string& id, const ApiRequest& req) {
    const Command cmd = command_from_json(parse_body(req));
    std::optional<std::uint64_t> expected;
    if (const auto h = req.header(kExpectedRevisionHeader)) {
        const auto v = parse_int(*h);
        if (!v || *v < 0) fail(ApiErrorCode::BadRequest, std::string(kExpectedRevisionHeader) + " must be an integer");
        expected = static_cast<std::uint64_t>(*v);
    }
    const auto e = entry(id);
    std::lock_guard writer(e->writer);
    auto next = std::make_shared<const Session>(mutate(*e->load(), cmd, expected));
    e->store(next);
    ApiResponse r = json_response({{"revision", next->revision}, {"command", command_name(cmd)}});
    r.headers[kRevisionHeader] = std::to_string(next->revision);
    return r;
}

ApiResponse Service::get_frame(const std::string& id, const ApiRequest& req) {
    const auto e = entry(id);
    const auto s = e->load();
    const auto [w, h] = image_size(req, s->camera.width);
    return png_response(render_session(*s, *e->volume, e->model.get(), w, h), s->revision);
}

ApiResponse Service::get_slice(const std::string& id, const std::string& plane_id, const ApiRequest& req) {
    const auto e = entry(id);
    const auto s = e->load();
    const SlicingPlane* plane = s->find_plane(plane_id);
    if (!plane) fail(ApiErrorCode::NotFound, "no plane '" + plane_id + "'");
    const long long w = int_param(req, "w", plane->resolution_u);
    const long long h = int_param(req, "h", plane->resolution_v);
    if (w < 1 || h < 1 || w > kMaxServiceImageSide || h > kMaxServiceImageSide)
        fail(ApiErrorCode::BadRequest, "image size must lie in [1, " + std::to_string(kMaxServiceImageSide) + "]");
    const bool needles = int_param(req, "needles", 0) != 0;
    return png_response(
        render_session_slice(*s, *e->volume, plane_id, static_cast<int>(w), static_cast<int>(h), needles),
        s->revision);
}

ApiResponse Service::get_histogram(const std::string& id, const ApiRequest& req) {
    const auto e = entry(id);
    const long long bins = int_param(req, "bins", 256);
    if (bins < 2 || bins > 1 << 20) fail(ApiErrorCode::BadRequest, "bins must lie in [2, 1048576]");
    return json_response(histogram(*e->volume, static_cast<int>(bins)));
}

ApiResponse Service::get_score(const std::string& id, const ApiRequest& req) {
    const auto e = entry(id);
    const auto s = e->load();
    if (!e->model) fail(ApiErrorCode::BadRequest, "session has no anatomy model");
    const auto report = score_session(*s, e->volume.get(), *e->model, string_param(req, "needle"),
                                      string_param(req, "acupoint"));
    ApiResponse r = json_response(report);
    r.headers[kRevisionHeader] = std::to_string(s->revision);
    return r;
}

// ---- HTTP -------------------------------------------------------------------

std::pair<std::string, int> parse_bind_address(const std::string& bind) {
    const auto colon = bind.rfind(':');
    if (colon == std::string::npos || colon == 0)
        throw Error(ErrorCode::InvalidArgument, "bind address must look like host:port, got '" + bind + "'");
    const auto port = parse_int(bind.substr(colon + 1));
    if (!port || *port < 0 || *port > 65535)
        throw Error(ErrorCode::InvalidArgument, "invalid port in bind address '" + bind + "'");
    return {bind.substr(0, colon), static_cast<int>(*port)};
}

struct HttpServer::Impl {
    httplib::Server server;
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>()) {
    auto handler = [&service](const httplib::Request& req, httplib::Response& res) {
        ApiRequest r;
        r.method = req.method;
        r.path = req.path;
        for (const auto& [k, v] : req.params) r.query.emplace(k, v);
        for (const auto& [k, v] : req.headers) r.headers.emplace(k, v);
        r.body = req.body;
        const ApiResponse out = service.handle(r);
        res.status = out.status;
        for (const auto& [k, v] : out.headers) res.set_header(k, v);
        res.set_content(out.body, out.content_type);
    };
    impl_->server.Get(".*", handler);
    impl_->server.Post(".*", handler);
    // httplib's default adds SO_REUSEPORT, which lets a second server share a
    // busy port silently.
    impl_->server.set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    impl_->server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
        res.status = 500;
        res.set_content(ApiError{ApiErrorCode::Internal, "unhandled exception", std::nullopt}.to_json().dump(),
                        "application/json");
    });
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::bind(const std::string& host, int port) {
    const std::string where = host + ":" + std::to_string(port);
    if (port == 0) {
        port_ = impl_->server.bind_to_any_port(host);
        if (port_ < 0) throw Error(ErrorCode::IoError, "cannot bind " + where);
    } else {
        if (!impl_->server.bind_to_port(host, port)) throw Error(ErrorCode::IoError, "cannot bind " + where);
        port_ = port;
    }
}

void HttpServer::run() {
    if (port_ < 0) throw Error(ErrorCode::InvalidArgument, "bind() must succeed before run()");
    impl_->server.listen_after_bind();
}

void HttpServer::stop() {
    if (impl_) impl_->server.stop();
}

} // namespace acudesk

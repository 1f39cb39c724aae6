#pragma once

#include "acudesk/anatomy.hpp"
#include "acudesk/error.hpp"
#include "acudesk/session.hpp"
#include "acudesk/volume.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace acudesk {

enum class ApiErrorCode { BadRequest, NotFound, Conflict, Unsupported, Internal };

std::string_view to_string(ApiErrorCode code) noexcept;
int http_status(ApiErrorCode code) noexcept;

struct ApiError {
    ApiErrorCode code = ApiErrorCode::Internal;
    std::string message;
    std::optional<std::string> detail;

    Json to_json() const;
};

/// Library error → API error. Lookups of missing things become not_found,
/// stale revisions conflict, unreadable formats unsupported, and everything the
/// caller could fix in the request bad_request.
ApiError to_api_error(const Error& e);

/// Transport-neutral request; header names are matched case-insensitively.
struct ApiRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::map<std::string, std::string> headers;
    std::string body;

    std::optional<std::string> header(std::string_view name) const;
};

struct ApiResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
    std::map<std::string, std::string> headers;
};

inline constexpr int kMaxServiceImageSide = 4096;
inline constexpr const char* kExpectedRevisionHeader = "X-Expected-Revision";
inline constexpr const char* kRevisionHeader = "X-Revision";

struct CatalogEntry {
    std::string name;
    std::filesystem::path path;
    std::string kind; // "nrrd", "dicom" or "model"
};

/// Volumes under <root>/volumes (NRRD files or DICOM directories) and model
/// manifests under <root>/models (*.json, or <dir>/model.json).
std::vector<CatalogEntry> scan_catalog(const std::filesystem::path& data_root);

/// Request router and session store. All HTTP-independent behaviour lives here
/// so it can be exercised in-process; HttpServer only moves bytes.
///
/// Each session has a single writer at a time. Readers take the current
/// immutable snapshot and render it without holding any lock.
class Service {
public:
    /// Throws InvalidArgument when `data_root` is not a readable directory.
    explicit Service(std::filesystem::path data_root);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    ApiResponse handle(const ApiRequest& request);

    const std::filesystem::path& data_root() const noexcept { return data_root_; }

    /// Current snapshot, or nullptr for an unknown id.
    std::shared_ptr<const Session> snapshot(const std::string& session_id) const;

private:
    struct Entry;

    ApiResponse route(const ApiRequest& request);
    ApiResponse get_volumes();
    ApiResponse post_session(const ApiRequest& request);
    ApiResponse get_session(const std::string& id);
    ApiResponse post_command(const std::string& id, const ApiRequest& request);
    ApiResponse get_frame(const std::string& id, const ApiRequest& request);
    ApiResponse get_slice(const std::string& id, const std::string& plane_id, const ApiRequest& request);
    ApiResponse get_histogram(const std::string& id, const ApiRequest& request);
    ApiResponse get_score(const std::string& id, const ApiRequest& request);

    std::shared_ptr<Entry> entry(const std::string& id) const;
    std::shared_ptr<const Volume> volume_for(const std::filesystem::path& path, std::vector<std::string>* warnings);
    std::shared_ptr<const AnatomyModel> model_for(const std::filesystem::path& path);

    std::filesystem::path data_root_;
    mutable std::mutex mutex_; // guards the maps below, never held while rendering
    std::map<std::string, std::shared_ptr<Entry>> sessions_;
    std::map<std::string, std::shared_ptr<const Volume>> volumes_;
    std::map<std::string, std::shared_ptr<const AnatomyModel>> models_;
    std::uint64_t next_id_ = 1;
};

/// "host:port" → parts. Throws InvalidArgument.
std::pair<std::string, int> parse_bind_address(const std::string& bind);

/// Blocking HTTP front end for a Service.
class HttpServer {
public:
    explicit HttpServer(Service& service);
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds without serving yet. Port 0 picks a free port. A bind failure
    /// throws IoError whose message contains "host:port".
    void bind(const std::string& host, int port);
    int port() const noexcept { return port_; }

    /// Serves until stop() is called from another thread.
    void run();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int port_ = -1;
};

} // namespace acudesk

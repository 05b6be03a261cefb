#pragma once

// Local HTTP/JSON service. `Service` holds the handlers and can be driven
// directly; `Server` binds it to a socket.

#include <filesystem>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>

#include "capsel/partlib.hpp"

namespace capsel::api {

struct Response {
    int status = 200;
    std::string body;  // JSON text
};

/// Maps an exception to {error: {code, message}} with 400/422/503.
Response error_response(const std::exception& e);

class Service {
public:
    explicit Service(PartLibrary library, std::filesystem::path base_dir = ".");

    /// Dispatches on method and path. A POST without an application/json
    /// content type is rejected with 400.
    Response handle(const std::string& method, const std::string& path, const std::string& content_type,
                    const std::string& body, const std::multimap<std::string, std::string>& query = {});

    Response get_parts(const std::multimap<std::string, std::string>& query) const;
    Response post_solve(const std::string& body) const;
    Response post_sweep(const std::string& body) const;
    Response post_pdn(const std::string& body) const;
    Response post_demand(const std::string& body) const;
    Response post_parts(const std::string& body);

    /// The on-disk library plus parts added in this session.
    PartLibrary snapshot() const;

private:
    const PartLibrary base_;
    std::filesystem::path base_dir_;
    PartLibrary added_;
    mutable std::shared_mutex mutex_;
};

class Server {
public:
    explicit Server(Service& service);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds `host`; port 0 picks a free port. Returns the bound port or -1.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    bool listen();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace capsel::api

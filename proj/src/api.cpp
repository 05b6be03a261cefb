#include "capsel/api.hpp"

#include <mutex>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "capsel/error.hpp"
#include "capsel/report.hpp"

namespace capsel::api {

namespace {

using ojson = nlohmann::ordered_json;

Response ok(const ojson& j) { return {200, j.dump(2) + "\n"}; }

Response error_body(int status, const std::string& code, const std::string& message) {
    ojson j;
    j["error"] = {{"code", code}, {"message", message}};
    return {status, j.dump(2) + "\n"};
}

nlohmann::json parse_body(const std::string& body) {
    try {
        return nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("request body is not valid JSON: ") + e.what());
    }
}

std::set<std::string> split_list(const std::string& text) {
    std::set<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.insert(item);
    }
    return out;
}

double query_number(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw ValidationError(key, "query parameter '" + key + "' must be a number");
}

template <typename F>
Response guarded(F&& f) {
    try {
        return f();
    } catch (const std::exception& e) {
        return error_response(e);
    }
}

}  // namespace

Response error_response(const std::exception& e) {
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        switch (err->kind()) {
            case ErrorKind::parse: return error_body(400, "parse", e.what());
            case ErrorKind::validation: return error_body(400, "validation", e.what());
            case ErrorKind::infeasible: return error_body(422, "infeasible", e.what());
            case ErrorKind::resource_limit: return error_body(503, "resource_limit", e.what());
        }
    }
    if (dynamic_cast<const nlohmann::json::exception*>(&e) != nullptr) return error_body(400, "parse", e.what());
    return error_body(500, "internal", e.what());
}

Service::Service(PartLibrary library, std::filesystem::path base_dir)
    : base_(std::move(library)), base_dir_(std::move(base_dir)) {}

PartLibrary Service::snapshot() const {
    std::shared_lock lock(mutex_);
    PartLibrary parts = base_;
    parts.insert(parts.end(), added_.begin(), added_.end());
    return parts;
}

Response Service::get_parts(const std::multimap<std::string, std::string>& query) const {
    return guarded([&] {
        PartFilter filter;
        for (const auto& [key, value] : query) {
            if (key == "max_height") {
                filter.max_height = query_number(key, value);
            } else if (key == "min_voltage_rating") {
                filter.min_voltage_rating = query_number(key, value);
            } else if (key == "allowed_dielectrics") {
                filter.allowed_dielectrics = split_list(value);
            } else if (key == "allowed_manufacturers") {
                filter.allowed_manufacturers = split_list(value);
            } else {
                throw ValidationError(key, "unknown query parameter '" + key + "'");
            }
        }
        validate_filter(filter);
        return ok(library_to_json(filter_parts(snapshot(), filter)));
    });
}

Response Service::post_solve(const std::string& body) const {
    return guarded([&] { return ok(run_solve(spec_from_json(parse_body(body)), snapshot())); });
}

Response Service::post_sweep(const std::string& body) const {
    return guarded([&] {
        const auto j = parse_body(body);
        if (!j.is_object() || !j.contains("spec")) throw ParseError("sweep request needs a 'spec' object");
        return ok(run_sweep(spec_from_json(j.at("spec")), snapshot(), sweep_params_from_json(j)));
    });
}

Response Service::post_pdn(const std::string& body) const {
    return guarded([&] {
        const PartLibrary parts = snapshot();
        return ok(run_placement(placement_from_json(parse_body(body), base_dir_, &parts)));
    });
}

Response Service::post_demand(const std::string& body) const {
    return guarded([&] { return ok(run_demand(demand_request_from_json(parse_body(body), snapshot()))); });
}

Response Service::post_parts(const std::string& body) {
    return guarded([&] {
        const auto j = parse_body(body);
        PartLibrary incoming;
        if (j.is_array()) {
            incoming = library_from_json(j);
        } else {
            incoming.push_back(part_from_json(j));
        }
        std::unique_lock lock(mutex_);
        PartLibrary merged = base_;
        merged.insert(merged.end(), added_.begin(), added_.end());
        merged.insert(merged.end(), incoming.begin(), incoming.end());
        validate_library(merged);
        added_.insert(added_.end(), incoming.begin(), incoming.end());
        ojson out;
        auto ids = ojson::array();
        for (const auto& p : incoming) ids.push_back(p.id);
        out["added"] = std::move(ids);
        out["parts"] = merged.size();
        return ok(out);
    });
}

Response Service::handle(const std::string& method, const std::string& path, const std::string& content_type,
                         const std::string& body, const std::multimap<std::string, std::string>& query) {
    if (method == "GET" && path == "/parts") return get_parts(query);
    if (method != "POST") return error_body(404, "not_found", method + " " + path + " is not a known endpoint");
    if (path != "/solve" && path != "/sweep" && path != "/pdn" && path != "/demand" && path != "/parts") {
        return error_body(404, "not_found", method + " " + path + " is not a known endpoint");
    }
    if (content_type.rfind("application/json", 0) != 0) {
        return error_body(400, "content_type", "Content-Type must be application/json");
    }
    if (path == "/solve") return post_solve(body);
    if (path == "/sweep") return post_sweep(body);
    if (path == "/pdn") return post_pdn(body);
    if (path == "/demand") return post_demand(body);
    return post_parts(body);
}

struct Server::Impl {
    httplib::Server http;
};

Server::Server(Service& service) : impl_(std::make_unique<Impl>()) {
    auto adapter = [&service](const httplib::Request& req, httplib::Response& res) {
        std::multimap<std::string, std::string> query(req.params.begin(), req.params.end());
        const Response r = service.handle(req.method, req.path, req.get_header_value("Content-Type"), req.body, query);
        res.status = r.status;
        res.set_content(r.body, "application/json");
    };
    impl_->http.Get(".*", adapter);
    impl_->http.Post(".*", adapter);
    impl_->http.Put(".*", adapter);
    impl_->http.Delete(".*", adapter);
}

Server::~Server() = default;

int Server::bind(const std::string& host, int port) {
    if (port == 0) return impl_->http.bind_to_any_port(host);
    return impl_->http.bind_to_port(host, port) ? port : -1;
}

bool Server::listen() { return impl_->http.listen_after_bind(); }

void Server::stop() { impl_->http.stop(); }

void Server::wait_until_ready() const { impl_->http.wait_until_ready(); }

}  // namespace capsel::api

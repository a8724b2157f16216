#include "dcurve/service.hpp"

#include <cmath>
#include <cstdio>

#include <httplib.h>

namespace dcurve {

namespace {

void send_error(httplib::Response& res, int status, const std::string& msg, const std::string& path = "") {
    nlohmann::json j{{"error", msg}};
    if (!path.empty()) j["path"] = path;
    res.status = status;
    res.set_content(j.dump(), "application/json");
}

std::string fmt_ms(double ms) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", ms);
    return buf;
}

}  // namespace

RenderRequest parse_render_request(const std::string& body) {
    nlohmann::json j = nlohmann::json::parse(body);
    if (!j.is_object()) throw RenderError("body must be an object");
    RenderRequest r;
    if (!j.contains("viewport") || !j["viewport"].is_array() || j["viewport"].size() != 4)
        throw RenderError("viewport must be [x0, y0, x1, y1]");
    double v[4];
    for (int k = 0; k < 4; ++k) {
        if (!j["viewport"][k].is_number()) throw RenderError("viewport entries must be numbers");
        v[k] = j["viewport"][k].get<double>();
        if (!std::isfinite(v[k])) throw RenderError("viewport entries must be finite");
    }
    r.viewport.world = Rect{v[0], v[1], v[2], v[3]};
    for (const char* key : {"width", "height"}) {
        if (!j.contains(key) || !j[key].is_number_integer()) throw RenderError(std::string(key) + " must be an integer");
        long long n = j[key].get<long long>();
        if (n < 1 || n > 8192) throw RenderError(std::string(key) + " must be in [1, 8192]");
        (std::string(key) == "width" ? r.viewport.width : r.viewport.height) = static_cast<int>(n);
    }
    if (j.contains("aa")) {
        if (!j["aa"].is_boolean()) throw RenderError("aa must be a boolean");
        r.aa = j["aa"].get<bool>();
    }
    validate_viewport(r.viewport, r.aa);
    return r;
}

void RenderService::install(httplib::Server& server) {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Expose-Headers",
                                 "X-Resolve-Count, X-Interp-Count, X-Solve-Ms, X-Eval-Ms"}});
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });

    server.Post("/scene", [this](const httplib::Request& req, httplib::Response& res) {
        Scene scene;
        try {
            scene = load_scene(req.body);
        } catch (const SceneParseError& e) {
            return send_error(res, 400, e.what(), e.path());
        } catch (const SceneValidationError& e) {
            return send_error(res, 422, e.what(), e.path());
        }
        try {
            auto s = store_.create(scene);
            res.status = 201;
            res.set_content(nlohmann::json{{"session", s->id()}}.dump(), "application/json");
        } catch (const SceneValidationError& e) {
            send_error(res, 422, e.what(), e.path());
        } catch (const std::invalid_argument& e) {
            send_error(res, 422, e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, e.what());
        }
    });

    server.Post(R"(/session/([0-9a-f]+)/render)", [this](const httplib::Request& req, httplib::Response& res) {
        auto s = store_.find(req.matches[1]);
        if (!s) return send_error(res, 404, "unknown session");
        RenderRequest rr;
        try {
            rr = parse_render_request(req.body);
        } catch (const nlohmann::json::exception& e) {
            return send_error(res, 400, std::string("malformed JSON: ") + e.what());
        } catch (const RenderError& e) {
            return send_error(res, 422, e.what());
        }
        std::unique_lock lock(s->mutex(), std::try_to_lock);
        if (!lock.owns_lock()) return send_error(res, 409, "another update is in flight");
        try {
            RenderResult r = s->render(rr);
            res.status = 200;
            res.set_header("X-Resolve-Count", std::to_string(r.update.resolve_count));
            res.set_header("X-Interp-Count", std::to_string(r.update.interp_count));
            res.set_header("X-Solve-Ms", fmt_ms(r.update.solve_ms));
            res.set_header("X-Eval-Ms", fmt_ms(r.stats.eval_ms));
            res.set_content(std::string(r.png.begin(), r.png.end()), "image/png");
        } catch (const RenderError& e) {
            send_error(res, 422, e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, e.what());
        }
    });

    server.Get(R"(/session/([0-9a-f]+)/overlay)", [this](const httplib::Request& req, httplib::Response& res) {
        auto s = store_.find(req.matches[1]);
        if (!s) return send_error(res, 404, "unknown session");
        std::unique_lock lock(s->mutex(), std::try_to_lock);
        if (!lock.owns_lock()) return send_error(res, 409, "another update is in flight");
        res.set_content(s->overlay().dump(), "application/json");
    });
}

int serve(const std::string& host, int port, SessionOptions opts) {
    httplib::Server server;
    RenderService svc(opts);
    svc.install(server);
    std::fprintf(stderr, "listening on http://%s:%d\n", host.c_str(), port);
    return server.listen(host, port) ? 0 : 1;
}

}  // namespace dcurve

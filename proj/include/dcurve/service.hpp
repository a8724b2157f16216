#pragma once

#include <string>

#include "dcurve/session.hpp"

namespace httplib {
class Server;
}

namespace dcurve {

// HTTP routes:
//   POST /scene                 scene JSON -> 201 {"session": id}
//   POST /session/{id}/render   {"viewport":[x0,y0,x1,y1],"width":n,"height":n,"aa":bool} -> image/png
//   GET  /session/{id}/overlay  curves, leaf cells and labels
class RenderService {
public:
    explicit RenderService(SessionOptions opts = {}) : store_(opts) {}
    void install(httplib::Server& server);
    SessionStore& store() { return store_; }

private:
    SessionStore store_;
};

// Parse a render body; throws RenderError on invalid values and nlohmann parse errors on bad JSON.
RenderRequest parse_render_request(const std::string& body);

// Blocking server on host:port.
int serve(const std::string& host, int port, SessionOptions opts);

}  // namespace dcurve

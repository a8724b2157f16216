#include <gtest/gtest.h>

#include <thread>

#include "dcurve/service.hpp"
#include "fixtures.hpp"

// after Eigen: resolv.h defines a _res macro
#include <httplib.h>

using namespace dcurve;

namespace {

class ServiceTest : public ::testing::Test {
protected:
    void SetUp() override {
        SessionOptions o;
        o.initial_width = 64;
        svc_ = std::make_unique<RenderService>(o);
        svc_->install(server_);
        port_ = server_.bind_to_any_port("127.0.0.1");
        ASSERT_GT(port_, 0);
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
        client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
        client_->set_read_timeout(120, 0);
    }
    void TearDown() override {
        server_.stop();
        if (thread_.joinable()) thread_.join();
    }

    std::string create(const Scene& sc) {
        auto r = client_->Post("/scene", save_scene(sc), "application/json");
        EXPECT_TRUE(r);
        EXPECT_EQ(r->status, 201);
        return nlohmann::json::parse(r->body).at("session").get<std::string>();
    }

    httplib::Result render(const std::string& id, const std::string& body) {
        return client_->Post("/session/" + id + "/render", body, "application/json");
    }

    httplib::Server server_;
    std::unique_ptr<RenderService> svc_;
    std::unique_ptr<httplib::Client> client_;
    std::thread thread_;
    int port_ = 0;
};

const char* kView = R"({"viewport":[0,0,1,1],"width":32,"height":32,"aa":true})";

}  // namespace

TEST(RenderRequestParse, Fields) {
    RenderRequest r = parse_render_request(R"({"viewport":[0,1,2,3],"width":8,"height":4,"aa":false})");
    EXPECT_EQ(r.viewport.world, (Rect{0, 1, 2, 3}));
    EXPECT_EQ(r.viewport.width, 8);
    EXPECT_EQ(r.viewport.height, 4);
    EXPECT_FALSE(r.aa);
    EXPECT_TRUE(parse_render_request(R"({"viewport":[0,0,1,1],"width":8,"height":8})").aa);
    EXPECT_THROW(parse_render_request("{"), nlohmann::json::exception);
    EXPECT_THROW(parse_render_request(R"({"viewport":[0,0,1],"width":8,"height":8})"), RenderError);
    EXPECT_THROW(parse_render_request(R"({"viewport":[0,0,1,1],"width":8.5,"height":8})"), RenderError);
    EXPECT_THROW(parse_render_request(R"({"viewport":[0,0,1,1],"width":12,"height":8})"), RenderError);
    EXPECT_THROW(parse_render_request(R"({"viewport":[1,0,0,1],"width":8,"height":8,"aa":false})"), RenderError);
    EXPECT_THROW(parse_render_request(R"({"viewport":[0,0,1,1],"width":8,"height":8,"aa":1})"), RenderError);
}

TEST_F(ServiceTest, CreateSceneStatusCodes) {
    std::string id = create(verify::corner_scene());
    EXPECT_FALSE(id.empty());
    auto bad = client_->Post("/scene", "{not json", "application/json");
    ASSERT_TRUE(bad);
    EXPECT_EQ(bad->status, 400);
    EXPECT_TRUE(nlohmann::json::parse(bad->body).contains("error"));
    // Neumann condition on an open curve
    auto invalid = client_->Post(
        "/scene",
        R"({"curves":[{"id":"x","spans":[[[0,0],[0.3,0],[0.6,0],[1,0]]],"bc":{"type":"neumann","flux":0}}]})",
        "application/json");
    ASSERT_TRUE(invalid);
    EXPECT_EQ(invalid->status, 422);
    EXPECT_EQ(nlohmann::json::parse(invalid->body).at("path"), "/curves/0/bc");
}

TEST_F(ServiceTest, RenderReturnsPngWithHeaders) {
    std::string id = create(verify::corner_scene());
    auto r = render(id, kView);
    ASSERT_TRUE(r);
    ASSERT_EQ(r->status, 200);
    EXPECT_EQ(r->get_header_value("Content-Type"), "image/png");
    EXPECT_EQ(r->get_header_value("Access-Control-Allow-Origin"), "*");
    for (const char* h : {"X-Resolve-Count", "X-Interp-Count", "X-Solve-Ms", "X-Eval-Ms"})
        EXPECT_TRUE(r->has_header(h)) << h;
    Image img = decode_png(std::vector<std::uint8_t>(r->body.begin(), r->body.end()));
    EXPECT_EQ(img.width, 32);
    EXPECT_EQ(img.height, 32);

    // nothing left to refine: the same request is byte-identical
    auto again = render(id, kView);
    ASSERT_TRUE(again);
    EXPECT_EQ(again->get_header_value("X-Resolve-Count"), "0");
    EXPECT_EQ(again->body, r->body);
}

TEST_F(ServiceTest, RenderErrors) {
    std::string id = create(verify::corner_scene());
    auto missing = render("abcdef0123", kView);
    ASSERT_TRUE(missing);
    EXPECT_EQ(missing->status, 404);
    auto malformed = render(id, "{\"viewport\":");
    ASSERT_TRUE(malformed);
    EXPECT_EQ(malformed->status, 400);
    auto npot = render(id, R"({"viewport":[0,0,1,1],"width":30,"height":32,"aa":true})");
    ASSERT_TRUE(npot);
    EXPECT_EQ(npot->status, 422);
    auto npot_plain = render(id, R"({"viewport":[0,0,1,1],"width":30,"height":32,"aa":false})");
    ASSERT_TRUE(npot_plain);
    EXPECT_EQ(npot_plain->status, 200);
}

TEST_F(ServiceTest, ConcurrentUpdateConflicts) {
    std::string id = create(verify::corner_scene());
    auto s = svc_->store().find(id);
    ASSERT_TRUE(s);
    {
        std::lock_guard hold(s->mutex());
        auto r = render(id, kView);
        ASSERT_TRUE(r);
        EXPECT_EQ(r->status, 409);
    }
    auto ok = render(id, kView);
    ASSERT_TRUE(ok);
    EXPECT_EQ(ok->status, 200);
}

TEST_F(ServiceTest, CorsPreflight) {
    auto r = client_->Options("/scene");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 204);
    EXPECT_EQ(r->get_header_value("Access-Control-Allow-Origin"), "*");
    EXPECT_NE(r->get_header_value("Access-Control-Allow-Methods").find("POST"), std::string::npos);
}

TEST_F(ServiceTest, Overlay) {
    std::string id = create(verify::corner_scene());
    ASSERT_EQ(render(id, kView)->status, 200);
    auto r = client_->Get("/session/" + id + "/overlay");
    ASSERT_TRUE(r);
    ASSERT_EQ(r->status, 200);
    auto j = nlohmann::json::parse(r->body);
    EXPECT_EQ(j.at("session"), id);
    ASSERT_EQ(j.at("curves").size(), 2u);
    for (const auto& c : j["curves"]) {
        EXPECT_GT(c.at("points").size(), 1u);
        EXPECT_GE(c.at("panels").size(), 1u);
        std::string label = c.at("label");
        EXPECT_TRUE(label == "Fixed" || label == "Interpolating" || label == "Resolving");
    }
    EXPECT_GT(j.at("cells").size(), 0u);
    EXPECT_EQ(client_->Get("/session/0000/overlay")->status, 404);
}

TEST_F(ServiceTest, SessionsAreIndependent) {
    std::string a = create(verify::corner_scene());
    std::string b = create(verify::aa_fixture(0));
    EXPECT_NE(a, b);
    auto ra = render(a, kView), rb = render(b, kView);
    ASSERT_TRUE(ra && rb);
    EXPECT_NE(ra->body, rb->body);
    EXPECT_EQ(render(a, kView)->body, ra->body);
}

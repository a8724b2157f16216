#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <json.hpp>

#include "dcurve/adaptive.hpp"
#include "dcurve/renderer.hpp"

namespace dcurve {

struct SessionOptions {
    SolverOptions solver;
    AdaptiveOptions adaptive;
    bool adaptive_enabled = true;
    int initial_width = 512;  // pixel count across the full extent for the first adaptive pass
};

struct RenderRequest {
    Viewport viewport;
    bool aa = true;
};

struct RenderResult {
    Image image;
    std::vector<std::uint8_t> png;
    ViewportUpdate update;
    RenderStats stats;
};

// One scene with its solve state; callers serialize access through mutex().
class Session {
public:
    Session(std::string id, const Scene& scene, SessionOptions opts);

    const std::string& id() const { return id_; }
    std::mutex& mutex() { return mu_; }
    const Scene& scene() const { return scene_; }
    const SolveState& state() const { return *state_; }
    SolveState& state() { return *state_; }
    const SolveReport& initial_report() const { return initial_; }
    // scene bounds with a small margin
    Rect full_extent() const;

    RenderResult render(const RenderRequest& req);
    nlohmann::json overlay() const;

private:
    const EvalField& field();

    std::string id_;
    std::mutex mu_;
    Scene scene_;
    SessionOptions opts_;
    std::unique_ptr<SolveState> state_;
    SolveReport initial_;
    std::unique_ptr<EvalField> field_;
    std::uint64_t field_version_ = ~0ull;
    std::vector<CurveLabel> labels_;
};

class SessionStore {
public:
    explicit SessionStore(SessionOptions opts = {}) : opts_(opts) {}
    // preprocess and solve; returns the new session
    std::shared_ptr<Session> create(const Scene& scene);
    std::shared_ptr<Session> find(const std::string& id) const;
    std::size_t size() const;

private:
    std::string new_id();
    SessionOptions opts_;
    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
};

}  // namespace dcurve

#include "dcurve/session.hpp"

#include <random>

namespace dcurve {

Session::Session(std::string id, const Scene& scene, SessionOptions opts)
    : id_(std::move(id)), scene_(preprocess_scene(scene)), opts_(opts) {
    state_ = std::make_unique<SolveState>(scene_, opts_.solver);
    initial_ = solve_fmm_hybrid(*state_);
    labels_.assign(scene_.curves.size(), CurveLabel::Interpolating);
    if (opts_.adaptive_enabled) {
        auto up = update_viewport(*state_, full_extent(), opts_.initial_width, opts_.adaptive);
        labels_ = up.labels;
    }
}

Rect Session::full_extent() const {
    Rect b = scene_.bounds();
    double m = 0.05 * std::max(b.width(), b.height());
    if (!(m > 0.0)) m = 1.0;
    return b.inflated(m);
}

const EvalField& Session::field() {
    if (!field_ || field_version_ != state_->version) {
        field_ = std::make_unique<EvalField>(make_eval_field(*state_));
        field_version_ = state_->version;
    }
    return *field_;
}

RenderResult Session::render(const RenderRequest& req) {
    validate_viewport(req.viewport, req.aa);
    RenderResult out;
    if (opts_.adaptive_enabled) {
        out.update = update_viewport(*state_, req.viewport.world, req.viewport.width, opts_.adaptive);
        labels_ = out.update.labels;
    } else {
        out.update.labels.assign(scene_.curves.size(), CurveLabel::Fixed);
        for (std::size_t c = 0; c < scene_.curves.size(); ++c)
            if (state_->disc.paths()[c].bounds().intersects(req.viewport.world)) {
                out.update.labels[c] = CurveLabel::Interpolating;
                ++out.update.interp_count;
            }
        labels_ = out.update.labels;
    }
    out.image = dcurve::render(field(), req.viewport, req.aa, &out.stats);
    out.png = encode_png(out.image);
    return out;
}

nlohmann::json Session::overlay() const {
    nlohmann::json j;
    j["session"] = id_;
    nlohmann::json curves = nlohmann::json::array();
    const Discretization& disc = state_->disc;
    for (std::size_t c = 0; c < disc.curve_count(); ++c) {
        nlohmann::json pts = nlohmann::json::array();
        auto [p0, p1] = disc.curve_panels(static_cast<int>(c));
        const int s = disc.s();
        for (int p = p0; p < p1; ++p)
            for (int k = 0; k < s; ++k) {
                const auto& seg = disc.solve_segments()[static_cast<std::size_t>(p) * s + k].seg;
                if (p == p0 && k == 0) pts.push_back({seg.p1.x, seg.p1.y});
                pts.push_back({seg.p2.x, seg.p2.y});
            }
        nlohmann::json panels = nlohmann::json::array();
        for (int p = p0; p < p1; ++p) panels.push_back({disc.panels()[p].a, disc.panels()[p].b});
        curves.push_back({{"id", scene_.curves[c].id},
                          {"points", pts},
                          {"panels", panels},
                          {"label", label_name(labels_[c])}});
    }
    j["curves"] = curves;
    nlohmann::json cells = nlohmann::json::array();
    if (state_->tree) {
        const Quadtree& t = *state_->tree;
        for (int leaf : t.leaves()) {
            Rect b = t.box(t.cells[leaf]);
            cells.push_back({b.xmin, b.ymin, b.xmax, b.ymax});
        }
    }
    j["cells"] = cells;
    Rect e = full_extent();
    j["extent"] = {e.xmin, e.ymin, e.xmax, e.ymax};
    return j;
}

std::string SessionStore::new_id() {
    static thread_local std::random_device rd;
    std::uniform_int_distribution<unsigned> d(0, 15);
    std::string id;
    for (int i = 0; i < 32; ++i) id.push_back("0123456789abcdef"[d(rd)]);
    return id;
}

std::shared_ptr<Session> SessionStore::create(const Scene& scene) {
    std::string id;
    {
        std::lock_guard lock(mu_);
        do id = new_id();
        while (sessions_.count(id));
    }
    auto s = std::make_shared<Session>(id, scene, opts_);
    std::lock_guard lock(mu_);
    sessions_[id] = s;
    return s;
}

std::shared_ptr<Session> SessionStore::find(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

std::size_t SessionStore::size() const {
    std::lock_guard lock(mu_);
    return sessions_.size();
}

}  // namespace dcurve

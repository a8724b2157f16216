#include "dcurve/dense_solver.hpp"

#include <stdexcept>

#include "dcurve/legendre.hpp"

namespace dcurve {

BoundaryData sample_boundary_data(const Discretization& disc) {
    BoundaryData d;
    std::size_t n = disc.node_count();
    for (int c = 0; c < 3; ++c) {
        d.average[c].assign(n, 0.0);
        d.jump[c].assign(n, 0.0);
        d.flux[c].assign(n, 0.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Node& node = disc.nodes()[i];
        const DiffusionCurve& curve = disc.scene().curves[node.curve];
        if (const auto* nb = std::get_if<NeumannBc>(&curve.bc)) {
            for (int c = 0; c < 3; ++c) d.flux[c][i] = nb->flux;
            continue;
        }
        for (int c = 0; c < 3; ++c) {
            double up = sample_boundary_value(curve, node.f, Side::Plus, c);
            double um = sample_boundary_value(curve, node.f, Side::Minus, c);
            d.average[c][i] = 0.5 * (up + um);
            d.jump[c][i] = up - um;
        }
    }
    return d;
}

DensitySet assemble_densities(const Discretization& disc, const BoundaryData& data, const Channels& unknown) {
    DensitySet d;
    std::size_t n = disc.node_count();
    for (int c = 0; c < 3; ++c) {
        d.sigma[c].resize(n);
        d.mu[c].resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (disc.is_neumann_node(i)) {
                d.sigma[c][i] = data.flux[c][i];
                d.mu[c][i] = unknown[c][i];
            } else {
                d.sigma[c][i] = unknown[c][i];
                d.mu[c][i] = data.jump[c][i];
            }
        }
    }
    return d;
}

Channels extract_unknowns(const Discretization& disc, const DensitySet& d) {
    Channels x;
    std::size_t n = disc.node_count();
    for (int c = 0; c < 3; ++c) {
        x[c].resize(n);
        for (std::size_t i = 0; i < n; ++i) x[c][i] = disc.is_neumann_node(i) ? d.mu[c][i] : d.sigma[c][i];
    }
    return x;
}

std::vector<double> interpolate_to_segments(const Discretization& disc, std::span<const SegmentRecord> segs,
                                            std::span<const double> nodal) {
    const int g = disc.g();
    std::vector<double> out(segs.size());
    std::vector<double> coeffs, row(g);
    int current = -1;
    for (std::size_t j = 0; j < segs.size(); ++j) {
        const SegmentRecord& r = segs[j];
        if (r.panel != current) {
            current = r.panel;
            coeffs = density_coeffs(nodal.subspan(static_cast<std::size_t>(current) * g, g));
        }
        const Panel& P = disc.panels()[current];
        double fm = 0.5 * (r.f1 + r.f2);
        double x = 2.0 * (fm - P.a) / (P.b - P.a) - 1.0;
        legendre_values(x, g, row);
        double acc = 0.0;
        for (int k = 0; k < g; ++k) acc += coeffs[k] * row[k];
        out[j] = acc;
    }
    return out;
}

LayerField make_layer_field(const Discretization& disc, std::span<const SegmentRecord> segs, const DensitySet& d) {
    LayerField f;
    f.segments.reserve(segs.size());
    for (const auto& r : segs) f.segments.push_back(r.seg);
    f.constant = d.constant;
    for (int c = 0; c < 3; ++c) {
        f.sigma[c] = interpolate_to_segments(disc, segs, d.sigma[c]);
        f.mu[c] = interpolate_to_segments(disc, segs, d.mu[c]);
    }
    return f;
}

Channels eval_potential_dense(const LayerField& field, std::span<const Vec2> targets, EvalSide side) {
    Channels out;
    for (auto& o : out) o.assign(targets.size(), 0.0);
    const auto& segs = field.segments;
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(targets.size()); ++t) {
        Vec2 q = targets[t];
        double acc[3] = {0, 0, 0};
        double jump[3] = {0, 0, 0};
        int singular = 0;
        for (std::size_t j = 0; j < segs.size(); ++j) {
            const SourceSegment& s = segs[j];
            KernelPair k = integrate_GF(s.p1, s.p2, s.scale(), q);
            for (int c = 0; c < 3; ++c) acc[c] += k.g * field.sigma[c][j] + k.f * field.mu[c][j];
            if (side != EvalSide::PrincipalValue && classify_target(s, q) == TargetClass::Singular) {
                ++singular;
                for (int c = 0; c < 3; ++c) jump[c] += field.mu[c][j];
            }
        }
        double sgn = side == EvalSide::Plus ? 0.5 : -0.5;
        for (int c = 0; c < 3; ++c) out[c][t] = acc[c] + field.constant[c] + (singular ? sgn * jump[c] / singular : 0.0);
    }
    return out;
}

std::vector<double> charge_weights(const Discretization& disc) {
    const int g = disc.g(), s = disc.s();
    const Matrix& interp = node_to_segment_interp(g, s);
    const auto& segs = disc.solve_segments();
    std::vector<double> w(disc.node_count(), 0.0);
    for (std::size_t p = 0; p < disc.panels().size(); ++p)
        for (int j = 0; j < s; ++j) {
            double arc = segs[p * s + j].seg.arc;
            for (int b = 0; b < g; ++b) w[p * g + b] += arc * interp(j, b);
        }
    return w;
}

HybridMatrices assemble_hybrid(const Discretization& disc) {
    const int g = disc.g(), s = disc.s();
    const auto& nodes = disc.nodes();
    const auto& segs = disc.solve_segments();
    const std::size_t N = nodes.size(), S = segs.size();
    Eigen::MatrixXd Gbar(N, S), Fbar(N, S);
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(N); ++i) {
        for (std::size_t j = 0; j < S; ++j) {
            const SourceSegment& sg = segs[j].seg;
            KernelPair k = integrate_GF(sg.p1, sg.p2, sg.scale(), nodes[i].target);
            Gbar(i, j) = k.g;
            Fbar(i, j) = k.f;
        }
    }
    const Matrix& interp = node_to_segment_interp(g, s);
    HybridMatrices m;
    m.G = Eigen::MatrixXd::Zero(N, N);
    m.F = Eigen::MatrixXd::Zero(N, N);
    const std::size_t P = disc.panels().size();
    for (std::size_t p = 0; p < P; ++p) {
        Eigen::MatrixXd block(s, g);
        for (int a = 0; a < s; ++a)
            for (int b = 0; b < g; ++b) block(a, b) = interp(a, b);
        m.G.middleCols(p * g, g) = Gbar.middleCols(p * s, s) * block;
        m.F.middleCols(p * g, g) = Fbar.middleCols(p * s, s) * block;
    }
    return m;
}

DensitySet solve_dense_hybrid(const Discretization& disc) {
    const std::size_t N = disc.node_count();
    bool any_dirichlet = false;
    for (std::size_t c = 0; c < disc.curve_count(); ++c) any_dirichlet |= !disc.is_neumann_curve(static_cast<int>(c));
    if (!any_dirichlet) throw std::invalid_argument("solve_dense_hybrid: at least one Dirichlet curve is required");
    BoundaryData data = sample_boundary_data(disc);
    HybridMatrices m = assemble_hybrid(disc);
    std::vector<double> cw = charge_weights(disc);
    // unknowns: nodal values then the constant; last row holds the total charge at zero
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N + 1, N + 1);
    for (std::size_t j = 0; j < N; ++j) {
        if (disc.is_neumann_node(j)) {
            A.col(j).head(N) = m.F.col(j);
            A(j, j) -= 0.5;
        } else {
            A.col(j).head(N) = m.G.col(j);
            A(N, j) = cw[j];
        }
    }
    A.col(N).head(N).setOnes();
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    Channels x;
    std::array<double, 3> constant{};
    for (int c = 0; c < 3; ++c) {
        Eigen::VectorXd known_sigma(N), known_mu(N), b(N + 1);
        double known_charge = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            bool neu = disc.is_neumann_node(i);
            known_sigma(i) = neu ? data.flux[c][i] : 0.0;
            known_mu(i) = neu ? 0.0 : data.jump[c][i];
            b(i) = neu ? 0.0 : data.average[c][i];
            if (neu) known_charge += cw[i] * data.flux[c][i];
        }
        b.head(N) -= m.F * known_mu + m.G * known_sigma;
        b(N) = -known_charge;
        Eigen::VectorXd sol = lu.solve(b);
        x[c].assign(sol.data(), sol.data() + N);
        constant[c] = sol(N);
    }
    DensitySet d = assemble_densities(disc, data, x);
    d.constant = constant;
    return d;
}

Eigen::MatrixXd assemble_bem_G(std::span<const SourceSegment> segs, std::span<const Vec2> targets) {
    Eigen::MatrixXd G(targets.size(), segs.size());
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(targets.size()); ++i)
        for (std::size_t j = 0; j < segs.size(); ++j)
            G(i, j) = integrate_G(segs[j].p1, segs[j].p2, segs[j].scale(), targets[i]);
    return G;
}

BemSolution solve_dense_bem(const Discretization& disc) {
    for (std::size_t c = 0; c < disc.curve_count(); ++c)
        if (disc.is_neumann_curve(static_cast<int>(c)))
            throw std::invalid_argument("solve_dense_bem: Neumann curves are not supported by the baseline");
    const auto& recs = disc.solve_segments();
    const std::size_t S = recs.size();
    BemSolution sol;
    std::vector<Vec2> targets(S);
    for (std::size_t j = 0; j < S; ++j) {
        sol.field.segments.push_back(recs[j].seg);
        targets[j] = recs[j].seg.midpoint();
    }
    Eigen::MatrixXd G(S, S), F(S, S);
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(S); ++i)
        for (std::size_t j = 0; j < S; ++j) {
            const SourceSegment& sg = recs[j].seg;
            KernelPair k = integrate_GF(sg.p1, sg.p2, sg.scale(), targets[i]);
            G(i, j) = k.g;
            F(i, j) = k.f;
        }
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(S + 1, S + 1);
    A.topLeftCorner(S, S) = G;
    A.col(S).head(S).setOnes();
    for (std::size_t j = 0; j < S; ++j) A(S, j) = recs[j].seg.arc;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    for (int c = 0; c < 3; ++c) {
        Eigen::VectorXd mu(S), b(S + 1);
        for (std::size_t j = 0; j < S; ++j) {
            const DiffusionCurve& curve = disc.scene().curves[recs[j].curve];
            double fm = 0.5 * (recs[j].f1 + recs[j].f2);
            double up = sample_boundary_value(curve, fm, Side::Plus, c);
            double um = sample_boundary_value(curve, fm, Side::Minus, c);
            mu(j) = up - um;
            b(j) = 0.5 * (up + um);
        }
        b.head(S) -= F * mu;
        b(S) = 0.0;
        Eigen::VectorXd x = lu.solve(b);
        sol.field.sigma[c].assign(x.data(), x.data() + S);
        sol.field.mu[c].assign(mu.data(), mu.data() + S);
        sol.field.constant[c] = x(S);
    }
    return sol;
}

}  // namespace dcurve

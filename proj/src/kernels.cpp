#include "adsim/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <sstream>

namespace adsim {

namespace {

bool in01(double v) { return v >= 0.0 && v <= 1.0; }

double positive_part(double p) { return p > 0.0 ? p : 0.0; }

// composite Simpson with n (even) panels
double simpson(const std::function<double(double)>& f, double lo, double hi, int n) {
    if (hi <= lo) return 0.0;
    if (n % 2) ++n;
    const double h = (hi - lo) / n;
    double s = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) s += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

}  // namespace

void ModelParams::validate() const {
    const int N = n_species;
    if (N < 2) throw HypothesisError("H1", "need at least 2 species");
    auto need_pos = [](double v, const std::string& name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw HypothesisError("H1", name + " must be a positive constant, got " +
                                            std::to_string(v));
    };
    need_pos(eps, "eps");
    need_pos(C_F, "C_F");
    need_pos(C_S, "C_S");
    need_pos(C_G, "C_G");
    need_pos(mu0, "mu0");
    need_pos(U_bar, "U_bar");
    if ((int)d.size() != N - 1 || (int)sigma.size() != N - 1 || (int)gamma.size() != N - 1)
        throw HypothesisError("H1", "d, sigma, gamma must have N-1 entries");
    for (int i = 0; i < N - 1; ++i) {
        need_pos(d[i], "d[" + std::to_string(i + 1) + "]");
        need_pos(sigma[i], "sigma[" + std::to_string(i + 1) + "]");
        need_pos(gamma[i], "gamma[" + std::to_string(i + 1) + "]");
    }
    if ((int)a_coag.size() != N)
        throw HypothesisError("H1", "a_coag must be N x N");
    for (int i = 0; i < N; ++i) {
        if ((int)a_coag[i].size() != N)
            throw HypothesisError("H1", "a_coag must be N x N");
        for (int j = 0; j < N; ++j) {
            double v = a_coag[i][j];
            if (!std::isfinite(v) || v < 0.0)
                throw HypothesisError("H1", "a_coag entries must be nonnegative");
            if (i < N - 1 && !(v > 0.0))
                throw HypothesisError("H1", "a_coag[" + std::to_string(i + 1) + "][" +
                                                std::to_string(j + 1) +
                                                "] must be a positive constant");
            if (std::abs(v - a_coag[j][i]) > 1e-12)
                throw HypothesisError("H1", "a_coag must be symmetric");
        }
    }
}

double PiecewiseConstant::operator()(double t) const {
    if (knots.empty()) return 0.0;
    auto it = std::upper_bound(knots.begin(), knots.end(), t);
    std::size_t i = static_cast<std::size_t>(it - knots.begin());
    if (i == 0) return values.front();
    return values[i - 1];
}

double PiecewiseConstant::max_value() const {
    double m = values.empty() ? 0.0 : values[0];
    for (double v : values) m = std::max(m, v);
    return m;
}

double PiecewiseConstant::min_value() const {
    double m = values.empty() ? 0.0 : values[0];
    for (double v : values) m = std::min(m, v);
    return m;
}

Table2D Table2D::from_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("empty kernel table csv");
    std::map<double, std::map<double, double>> rows;  // a -> b -> value
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string a_s, b_s, v_s;
        if (!std::getline(ss, a_s, ',') || !std::getline(ss, b_s, ',') || !std::getline(ss, v_s))
            throw ValidationError("malformed kernel table line: " + line);
        rows[std::stod(a_s)][std::stod(b_s)] = std::stod(v_s);
    }
    Table2D t;
    for (const auto& [a, row] : rows) t.a_grid_.push_back(a);
    if (t.a_grid_.size() < 2) throw ValidationError("kernel table needs >= 2 a-grid lines");
    const auto& first_row = rows.begin()->second;
    for (const auto& [b, v] : first_row) t.b_grid_.push_back(b);
    if (t.b_grid_.size() < 2) throw ValidationError("kernel table needs >= 2 b-grid lines");
    t.values_.reserve(t.a_grid_.size() * t.b_grid_.size());
    for (const auto& [a, row] : rows) {
        if (row.size() != t.b_grid_.size())
            throw ValidationError("kernel table is not a full grid");
        for (const auto& [b, v] : row) t.values_.push_back(v);
    }
    return t;
}

double Table2D::operator()(double a, double b) const {
    if (empty()) throw ValidationError("kernel table not loaded");
    auto cell = [](const std::vector<double>& g, double v) {
        std::size_t i = static_cast<std::size_t>(
            std::upper_bound(g.begin(), g.end(), v) - g.begin());
        if (i == 0) return std::size_t{0};
        if (i >= g.size()) return g.size() - 2;
        return i - 1;
    };
    std::size_t ia = cell(a_grid_, a), ib = cell(b_grid_, b);
    double ta = (a - a_grid_[ia]) / (a_grid_[ia + 1] - a_grid_[ia]);
    double tb = (b - b_grid_[ib]) / (b_grid_[ib + 1] - b_grid_[ib]);
    ta = std::clamp(ta, 0.0, 1.0);
    tb = std::clamp(tb, 0.0, 1.0);
    const std::size_t nb = b_grid_.size();
    double v00 = values_[ia * nb + ib], v01 = values_[ia * nb + ib + 1];
    double v10 = values_[(ia + 1) * nb + ib], v11 = values_[(ia + 1) * nb + ib + 1];
    return (1 - ta) * ((1 - tb) * v00 + tb * v01) + ta * ((1 - tb) * v10 + tb * v11);
}

PKernel::Row PKernel::row(double /*t*/, double b) const {
    Row r;
    if (b >= 1.0) return r;
    const double b_max = 1.0 - delta_clamp;
    if (b <= b_max) {
        r.height = 2.0 / (1.0 - b);
        r.lo = b;
        r.hi = 0.5 * (1.0 + b);
    } else {
        r.height = 2.0 / delta_clamp;
        r.lo = b;
        r.hi = std::min(1.0, b + 0.5 * delta_clamp);
    }
    return r;
}

double PKernel::eval(double t, double b, double a) const {
    if (a < b) return 0.0;
    if (kind == Kind::CustomTable) return table(a, b);
    Row r = row(t, b);
    if (r.hi <= r.lo) return 0.0;
    return (a >= r.lo && a <= r.hi) ? r.height : 0.0;
}

double PKernel::row_mass(double t, double b) const {
    if (kind == Kind::PaperDefault) {
        Row r = row(t, b);
        return r.height * std::max(0.0, r.hi - r.lo);
    }
    return row_pairing(t, b, [](double) { return 1.0; });
}

double PKernel::row_pairing(double t, double b,
                            const std::function<double(double)>& phi) const {
    if (kind == Kind::PaperDefault) {
        Row r = row(t, b);
        if (r.hi <= r.lo) return 0.0;
        return r.height * simpson(phi, r.lo, r.hi, 32);
    }
    // bilinear rows are piecewise linear in a; integrate per segment
    auto f = [&](double a) { return eval(t, b, a) * phi(a); };
    return simpson(f, b, 1.0, 512);
}

double JumpSpec::chi(double x, double t) const {
    for (const SpaceTimeBox& box : chi_boxes)
        if (x >= box.x_lo && x <= box.x_hi && t >= box.t_lo && t <= box.t_hi) return 1.0;
    return 0.0;
}

bool JumpSpec::any_box_active(double t) const {
    for (const SpaceTimeBox& box : chi_boxes)
        if (t >= box.t_lo && t <= box.t_hi) return true;
    return false;
}

Kernels::Kernels(ModelParams params, KernelChoice choice, JumpSpec jump)
    : params_(std::move(params)), choice_(std::move(choice)), jump_(std::move(jump)) {
    params_.validate();
    if (choice_.g_kind == KernelChoice::GKind::CustomTable && choice_.g_table.empty())
        throw ValidationError("custom-table G selected but no table loaded");
    if (jump_.p.kind == PKernel::Kind::CustomTable && jump_.p.table.empty())
        throw ValidationError("custom-table P selected but no table loaded");
    if (!(jump_.p.delta_clamp > 0.0 && jump_.p.delta_clamp < 1.0))
        throw ValidationError("P clamp must lie in (0,1)");

    // sampled Lipschitz estimate of P over b <= 0.9 (recorded, not asserted)
    const int nb = 181, na = 201;
    double lip = 0.0;
    std::vector<double> prev_row(na);
    for (int ib = 0; ib < nb; ++ib) {
        double b = 0.9 * ib / (nb - 1);
        double prev = 0.0;
        for (int ia = 0; ia < na; ++ia) {
            double a = 1.0 * ia / (na - 1);
            double v = jump_.p.eval(0.0, b, a);
            if (ia > 0) lip = std::max(lip, std::abs(v - prev) / (1.0 / (na - 1)));
            if (ib > 0) lip = std::max(lip, std::abs(v - prev_row[ia]) / (0.9 / (nb - 1)));
            prev = v;
            prev_row[ia] = v;
        }
    }
    jump_.p_lipschitz = lip;
}

double Kernels::eval_G(double x, double a, double b) const {
    (void)x;
    if (!in01(a) || !in01(b)) throw DomainError("eval_G arguments outside [0,1]");
    switch (choice_.g_kind) {
        case KernelChoice::GKind::PaperDefault:
            return params_.C_G * positive_part(b - a);
        case KernelChoice::GKind::Zero:
            return 0.0;
        case KernelChoice::GKind::CustomTable:
            return choice_.g_table(a, b);
    }
    return 0.0;
}

double Kernels::threshold_excess(std::span<const double> u) const {
    double s = 0.0;
    for (std::size_t m = 0; m < u.size(); ++m) s += (m + 1) * std::abs(u[m]);
    return positive_part(s - params_.U_bar);
}

double Kernels::eval_S(double x, double a, std::span<const double> u) const {
    (void)x;
    if (!in01(a)) throw DomainError("eval_S argument outside [0,1]");
    switch (choice_.s_kind) {
        case KernelChoice::SKind::PaperDefault:
            return params_.C_S * (1.0 - a) * threshold_excess(u);
        case KernelChoice::SKind::Zero:
            return 0.0;
        case KernelChoice::SKind::AffineTest:
            return choice_.affine_c * (1.0 - a);
    }
    return 0.0;
}

std::vector<double> Kernels::velocity_profile(double x, std::span<const double> targets,
                                              std::span<const double> b,
                                              std::span<const double> w,
                                              std::span<const double> u) const {
    if (b.size() != w.size()) throw ShapeError("velocity: positions/weights size mismatch");
    std::vector<double> out(targets.size(), 0.0);

    switch (choice_.s_kind) {
        case KernelChoice::SKind::PaperDefault: {
            double sx = params_.C_S * threshold_excess(u);
            for (std::size_t k = 0; k < targets.size(); ++k) out[k] += sx * (1.0 - targets[k]);
            break;
        }
        case KernelChoice::SKind::AffineTest:
            for (std::size_t k = 0; k < targets.size(); ++k)
                out[k] += choice_.affine_c * (1.0 - targets[k]);
            break;
        case KernelChoice::SKind::Zero:
            break;
    }

    switch (choice_.g_kind) {
        case KernelChoice::GKind::PaperDefault: {
            // sum_i w_i (b_i - a)^+ = suffix sums over the sorted b_i above a
            if (!std::is_sorted(b.begin(), b.end()))
                throw InternalError("velocity_profile requires sorted positions");
            const std::size_t n = b.size();
            std::vector<double> sw(n + 1, 0.0), swb(n + 1, 0.0);
            for (std::size_t i = n; i-- > 0;) {
                sw[i] = sw[i + 1] + w[i];
                swb[i] = swb[i + 1] + w[i] * b[i];
            }
            for (std::size_t k = 0; k < targets.size(); ++k) {
                double a = targets[k];
                std::size_t i = static_cast<std::size_t>(
                    std::upper_bound(b.begin(), b.end(), a) - b.begin());
                out[k] += params_.C_G * (swb[i] - a * sw[i]);
            }
            break;
        }
        case KernelChoice::GKind::CustomTable:
            for (std::size_t k = 0; k < targets.size(); ++k) {
                double acc = 0.0;
                for (std::size_t i = 0; i < b.size(); ++i)
                    acc += w[i] * eval_G(x, targets[k], b[i]);
                out[k] += acc;
            }
            break;
        case KernelChoice::GKind::Zero:
            break;
    }
    return out;
}

double Kernels::velocity(double x, double a, std::span<const double> b,
                         std::span<const double> w, std::span<const double> u) const {
    double target[1] = {a};
    return velocity_profile(x, std::span<const double>(target, 1), b, w, u)[0];
}

double Kernels::eval_F(std::span<const double> b, std::span<const double> w) const {
    if (b.size() != w.size()) throw ShapeError("eval_F: positions/weights size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i)
        s += w[i] * (params_.mu0 + b[i]) * (1.0 - b[i]);
    return params_.C_F * s;
}

std::vector<HypothesisCheck> run_hypothesis_checks(const ModelParams& params,
                                                   Kernels& kernels, double T) {
    std::vector<HypothesisCheck> checks;
    auto add = [&checks](std::string tag, bool ok, std::string detail, double value = 0.0) {
        checks.push_back({std::move(tag), ok, std::move(detail), value});
    };

    try {
        params.validate();
        add("H1", true, "all constants positive, a_coag symmetric");
    } catch (const HypothesisError& e) {
        add("H1", false, e.what());
    }

    // H3: eta nonnegative, chi boxes well formed and inside [0,T] in time
    {
        const JumpSpec& j = kernels.jump();
        bool ok = !j.eta.values.empty() && j.eta.knots.size() == j.eta.values.size();
        for (double v : j.eta.values) ok = ok && v >= 0.0 && std::isfinite(v);
        for (const SpaceTimeBox& box : j.chi_boxes)
            ok = ok && box.x_lo <= box.x_hi && box.t_lo <= box.t_hi;
        add("H3", ok, ok ? "eta >= 0, chi boxes well formed" : "eta/chi data invalid",
            j.eta.max_value());
    }

    // H4: G(1,b) = 0; a -> G nonincreasing; slopes bounded (constant recorded)
    {
        const int n = 101;
        bool ok = true;
        double c_rec = 0.0;
        std::string detail = "G(1,b)=0 and a->G nonincreasing on sampled grid";
        for (int ib = 0; ib < n && ok; ++ib) {
            double b = double(ib) / (n - 1);
            if (std::abs(kernels.eval_G(0.0, 1.0, b)) > 1e-12) {
                ok = false;
                detail = "G(1,b) != 0 at b=" + std::to_string(b);
            }
            for (int ia = 0; ia + 1 < n && ok; ++ia) {
                double a0 = double(ia) / (n - 1), a1 = double(ia + 1) / (n - 1);
                double fd = (kernels.eval_G(0.0, a1, b) - kernels.eval_G(0.0, a0, b)) * (n - 1);
                c_rec = std::max(c_rec, std::abs(fd));
                if (fd > 1e-8) {
                    ok = false;
                    detail = "G increases in a near a=" + std::to_string(a0) +
                             ", b=" + std::to_string(b);
                }
                double fdb = (kernels.eval_G(0.0, a0, a1) - kernels.eval_G(0.0, a0, a0)) * (n - 1);
                c_rec = std::max(c_rec, std::abs(fdb));
            }
        }
        add("H4", ok, detail, c_rec);
    }

    // H5: S(x,1,u) = 0; a -> S nonincreasing on a compact u box
    {
        const int n = 101;
        const double u_cap = std::max(1.0, 2.0 * params.U_bar);
        bool ok = true;
        double c_rec = 0.0;
        std::string detail = "S(x,1,u)=0 and a->S nonincreasing on sampled box";
        std::vector<double> u(params.n_species - 1);
        for (int s = 0; s < 5 && ok; ++s) {
            for (auto& v : u) v = u_cap * s / 4.0;
            if (std::abs(kernels.eval_S(0.0, 1.0, u)) > 1e-12) {
                ok = false;
                detail = "S(x,1,u) != 0";
                break;
            }
            for (int ia = 0; ia + 1 < n && ok; ++ia) {
                double a0 = double(ia) / (n - 1), a1 = double(ia + 1) / (n - 1);
                double fd = (kernels.eval_S(0.0, a1, u) - kernels.eval_S(0.0, a0, u)) * (n - 1);
                c_rec = std::max(c_rec, std::abs(fd));
                if (fd > 1e-8) {
                    ok = false;
                    detail = "S increases in a near a=" + std::to_string(a0);
                }
            }
        }
        add("H5", ok, detail, c_rec);
    }

    // H6: P >= 0, vanishes for a < b, unit row mass away from the clamp tail
    {
        const PKernel& p = kernels.jump().p;
        bool ok = true;
        std::string detail;
        const int n = 201;
        double worst = 0.0;
        // the default row keeps unit mass up to b = 1 - delta/2; validate there
        const double b_top = p.kind == PKernel::Kind::PaperDefault
                                 ? 1.0 - 0.5 * p.delta_clamp - 1e-9
                                 : 1.0 - 1e-6;
        for (int ib = 0; ib < n && ok; ++ib) {
            double b = b_top * ib / (n - 1);
            double mass = p.row_mass(0.0, b);
            worst = std::max(worst, std::abs(mass - 1.0));
            if (std::abs(mass - 1.0) > 1e-10) {
                ok = false;
                detail = "H6 normalization failed for b=" + std::to_string(b) +
                         " (row mass " + std::to_string(mass) + ")";
            }
            for (int ia = 0; ia < 20 && ok; ++ia) {
                double a = b * ia / 20.0;
                if (a < b && kernels.eval_P(0.0, b, a) != 0.0) {
                    ok = false;
                    detail = "P(t,b,a) != 0 for a<b at b=" + std::to_string(b);
                }
                if (kernels.eval_P(0.0, b, a) < 0.0) {
                    ok = false;
                    detail = "P < 0";
                }
            }
        }
        if (ok) detail = "rows normalized (max |mass-1| = " + std::to_string(worst) + ")";
        add("H6", ok, detail, kernels.jump().p_lipschitz);

        // clamp-tail residue, logged but never fatal
        double residue = 0.0;
        for (int ib = 0; ib <= 50; ++ib) {
            double b = b_top + (1.0 - b_top) * ib / 50.0;
            residue = std::max(residue, std::abs(1.0 - p.row_mass(0.0, b)));
        }
        add("H6-tail", true,
            "row-mass residue near b=1 (clamped kernel), max |1-mass| recorded", residue);
    }

    (void)T;
    return checks;
}

void require_hypotheses(const std::vector<HypothesisCheck>& checks) {
    for (const HypothesisCheck& c : checks)
        if (!c.ok) throw HypothesisError(c.tag, c.detail);
}

}  // namespace adsim

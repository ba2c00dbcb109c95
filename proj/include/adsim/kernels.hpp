#ifndef ADSIM_KERNELS_HPP_
#define ADSIM_KERNELS_HPP_

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "adsim/errors.hpp"

namespace adsim {

// Scalar model constants. Species are numbered 1..N; arrays indexed 0..N-2
// hold the per-species coefficients of the diffusing species, index N-1 is
// the non-diffusing aggregate bin.
struct ModelParams {
    int n_species = 2;  // N
    double eps = 1.0;   // time-scale ratio between aggregation and deterioration
    std::vector<double> d;      // diffusion, size N-1
    std::vector<double> sigma;  // clearance, size N-1
    std::vector<double> gamma;  // Robin coefficients, size N-1
    std::vector<std::vector<double>> a_coag;  // N x N symmetric coagulation rates
    double C_F = 1.0;
    double C_S = 1.0;
    double C_G = 1.0;
    double mu0 = 0.1;
    double U_bar = 1.0;

    // Enforces the positivity constraints and shape/symmetry of a_coag.
    void validate() const;
};

// Right-continuous step function of time; knots[0] must be 0.
struct PiecewiseConstant {
    std::vector<double> knots{0.0};
    std::vector<double> values{0.0};
    double operator()(double t) const;
    double max_value() const;
    double min_value() const;
};

struct SpaceTimeBox {
    double x_lo = 0.0, x_hi = 0.0;
    double t_lo = 0.0, t_hi = 0.0;
};

// Rectangular table with bilinear interpolation, loaded from (a,b,value) CSV
// rows covering a full tensor grid.
class Table2D {
  public:
    Table2D() = default;
    static Table2D from_csv(std::istream& in);
    bool empty() const { return values_.empty(); }
    double operator()(double a, double b) const;

  private:
    std::vector<double> a_grid_, b_grid_;
    std::vector<double> values_;  // values_[ia * b_grid_.size() + ib]
};

// Jump kernel P(t,b,a): probability density of landing at a from state b.
// The default kernel is 2/(1-b) on b <= a <= (1+b)/2. Its height diverges as
// b -> 1, so rows with b above b_max = 1 - delta_clamp reuse the b_max height
// and keep the row anchored at b with the clamped length; the row integral
// stays exactly 1 until the support hits a = 1, after which the deficiency is
// reported by row_mass and logged by the validator.
struct PKernel {
    enum class Kind { PaperDefault, CustomTable };
    Kind kind = Kind::PaperDefault;
    double delta_clamp = 1e-3;
    Table2D table;

    double eval(double t, double b, double a) const;

    struct Row {
        double height = 0.0;
        double lo = 0.0, hi = 0.0;  // support [lo, hi]; empty when hi <= lo
    };
    bool has_rows() const { return kind == Kind::PaperDefault; }
    Row row(double t, double b) const;
    double row_mass(double t, double b) const;
    // int P(t,b,a) phi(a) da  (composite Simpson on the support; exact for
    // polynomial phi up to cubic on the default kernel)
    double row_pairing(double t, double b, const std::function<double(double)>& phi) const;
};

struct JumpSpec {
    PiecewiseConstant eta;
    std::vector<SpaceTimeBox> chi_boxes;
    PKernel p;
    double p_lipschitz = 0.0;  // sampled estimate, recorded by validation

    double chi(double x, double t) const;
    bool any_box_active(double t) const;
};

struct KernelChoice {
    enum class GKind { PaperDefault, Zero, CustomTable };
    enum class SKind { PaperDefault, Zero, AffineTest };
    GKind g_kind = GKind::PaperDefault;
    SKind s_kind = SKind::PaperDefault;
    double affine_c = 1.0;  // the c of the affine test kernel c(1-a)
    Table2D g_table;
};

// Immutable bundle of all model ingredient evaluators.
class Kernels {
  public:
    Kernels(ModelParams params, KernelChoice choice, JumpSpec jump);

    const ModelParams& params() const { return params_; }
    const KernelChoice& choice() const { return choice_; }
    const JumpSpec& jump() const { return jump_; }
    JumpSpec& jump() { return jump_; }

    // peer-influence kernel G_x(a,b); default C_G * (b-a)^+
    double eval_G(double x, double a, double b) const;

    // toxicity S(x,a,u); even in each u component, zero at a=1
    double eval_S(double x, double a, std::span<const double> u) const;

    double eval_P(double t, double b, double a) const { return jump_.p.eval(t, b, a); }

    // (sum_m m*|u_m| - U_bar)^+ for the default S; the shared threshold factor
    double threshold_excess(std::span<const double> u) const;

    // deterioration velocity at a: sum_i w_i G(x,a,b_i) + S(x,a,u).
    // b must be sorted ascending; default G uses an exact suffix-sum reorder.
    double velocity(double x, double a, std::span<const double> b,
                    std::span<const double> w, std::span<const double> u) const;
    std::vector<double> velocity_profile(double x, std::span<const double> targets,
                                         std::span<const double> b,
                                         std::span<const double> w,
                                         std::span<const double> u) const;

    // monomer source: C_F sum_i w_i (mu0 + b_i)(1 - b_i)
    double eval_F(std::span<const double> b, std::span<const double> w) const;

  private:
    ModelParams params_;
    KernelChoice choice_;
    JumpSpec jump_;
};

// One validated model hypothesis; `value` carries the recorded constant
// (sampled slope bound, row residue, ...) when meaningful.
struct HypothesisCheck {
    std::string tag;
    bool ok = false;
    std::string detail;
    double value = 0.0;
};

// Sampled validation of the structural hypotheses on the kernel data over
// [0,T]. Records the sampled P Lipschitz estimate into spec.p_lipschitz.
std::vector<HypothesisCheck> run_hypothesis_checks(const ModelParams& params,
                                                   Kernels& kernels, double T);

// Throws HypothesisError for the first failed check.
void require_hypotheses(const std::vector<HypothesisCheck>& checks);

}  // namespace adsim

#endif  // ADSIM_KERNELS_HPP_

#ifndef ADSIM_MEASURE_HPP_
#define ADSIM_MEASURE_HPP_

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "adsim/errors.hpp"

namespace adsim {

// Probability measures on [0,1] represented as finite lists of weighted atoms.
//
// Two atom kinds exist: point atoms (genuine Dirac masses) and grid cells
// (mass bookkept at a cell midpoint; cell_width records the cell it stands
// for). The distinction matters only to the transport layer, which deposits
// absolutely continuous jump gain on cells and never on points. All metric
// operations treat every atom as a point mass at its position.

enum class AtomKind { GridCell, PointAtom };

struct Atom {
    double pos = 0.0;         // in [0,1]
    double weight = 0.0;      // >= 0
    AtomKind kind = AtomKind::PointAtom;
    double cell_width = 0.0;  // 0 for point atoms
};

class ParticleMeasure {
  public:
    ParticleMeasure() = default;

    // Validates: positions in [0,1] and sorted nondecreasing, weights >= 0,
    // total mass 1 within kMassTol. Atoms are stored as given (zero-weight
    // atoms survive; they act as deposit slots for the transport layer).
    explicit ParticleMeasure(std::vector<Atom> atoms);

    static ParticleMeasure dirac(double pos);
    // n equal cells covering [0,1], mass 1/n at each midpoint.
    static ParticleMeasure uniform_cells(int n);

    const std::vector<Atom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }

    double total_mass() const;

    // mu([0,s]); right-continuous, nondecreasing. Throws DomainError outside [0,1].
    double cdf(double s) const;

    // Merges co-located atoms (cells absorb points at the same position),
    // prunes atoms below the weight floor and renormalizes. The mass removed
    // by pruning is recorded on the result (pruned_mass) so drift stays auditable.
    ParticleMeasure canonical() const;
    double pruned_mass() const { return pruned_mass_; }

    bool operator==(const ParticleMeasure& other) const;

    static constexpr double kMassTol = 1e-12;
    static constexpr double kWeightFloor = 1e-15;

  private:
    std::vector<Atom> atoms_;
    double pruned_mass_ = 0.0;
};

// A scalar test function on [0,1] carrying its declared Lipschitz bound.
class LipschitzTestFunction {
  public:
    LipschitzTestFunction(std::function<double(double)> f, double lipschitz_bound);

    // Piecewise-linear through (breaks[i], values[i]); bound = max |slope|.
    static LipschitzTestFunction piecewise_linear(std::vector<double> breaks,
                                                  std::vector<double> values);

    double operator()(double a) const { return f_(a); }
    double lipschitz_bound() const { return bound_; }

    // Checks the declared bound against finite-difference slopes on an
    // n-point uniform grid (slack 1e-9). Returns the max sampled slope.
    double verify_on_grid(int n) const;

  private:
    std::function<double(double)> f_;
    double bound_;
};

// Plain sum \int h dmu = sum_i w_i h(x_i).
double pair(const ParticleMeasure& mu, const std::function<double(double)>& h);

// W1 via the closed form  int_0^1 |F_mu - F_nu| ds, evaluated exactly on the
// merged breakpoint partition. Symmetric, zero iff canonical forms coincide.
double wasserstein1(const ParticleMeasure& mu, const ParticleMeasure& nu);

// Transport LP solved by the north-west-corner walk over sorted atoms (the
// monotone coupling, optimal in 1D). Capacity-limited; test oracle only.
double wasserstein_lp_oracle(const ParticleMeasure& mu, const ParticleMeasure& nu);
constexpr std::size_t kLpOracleAtomLimit = 64;

// Positions mapped through a nondecreasing phi with range [0,1]; weights kept.
ParticleMeasure push_forward(const ParticleMeasure& mu,
                             const std::function<double(double)>& phi);

// int phi d(mu - nu); a lower bound for W1 whenever phi is 1-Lipschitz.
// Throws ValidationError if the declared bound exceeds 1.
double duality_lower_bound(const ParticleMeasure& mu, const ParticleMeasure& nu,
                           const LipschitzTestFunction& phi);

// CSV (position,weight,kind) with kind in {point,cell}. Loading re-validates
// and canonicalizes; cell widths are not part of the record format.
void write_measure_csv(std::ostream& out, const ParticleMeasure& mu);
ParticleMeasure read_measure_csv(std::istream& in);

}  // namespace adsim

#endif  // ADSIM_MEASURE_HPP_

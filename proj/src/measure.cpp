#include "adsim/measure.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace adsim {

namespace {

void check_atoms(const std::vector<Atom>& atoms) {
    double mass = 0.0;
    double prev = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        const Atom& a = atoms[i];
        if (!(a.pos >= 0.0 && a.pos <= 1.0))
            throw ValidationError("atom position outside [0,1]: " + std::to_string(a.pos));
        if (!(a.weight >= 0.0) || !std::isfinite(a.weight))
            throw ValidationError("negative or non-finite atom weight");
        if (a.cell_width < 0.0)
            throw ValidationError("negative cell width");
        if (a.kind == AtomKind::PointAtom && a.cell_width != 0.0)
            throw ValidationError("point atom with nonzero cell width");
        if (i > 0 && a.pos < prev)
            throw ValidationError("atom positions not sorted");
        prev = a.pos;
        mass += a.weight;
    }
    if (std::abs(mass - 1.0) > ParticleMeasure::kMassTol)
        throw ValidationError("total mass " + std::to_string(mass) + " is not 1");
}

}  // namespace

ParticleMeasure::ParticleMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    check_atoms(atoms_);
}

ParticleMeasure ParticleMeasure::dirac(double pos) {
    return ParticleMeasure({Atom{pos, 1.0, AtomKind::PointAtom, 0.0}});
}

ParticleMeasure ParticleMeasure::uniform_cells(int n) {
    if (n < 1) throw ValidationError("uniform_cells needs n >= 1");
    std::vector<Atom> atoms(n);
    const double w = 1.0 / n;
    for (int i = 0; i < n; ++i)
        atoms[i] = Atom{(i + 0.5) * w, w, AtomKind::GridCell, w};
    return ParticleMeasure(std::move(atoms));
}

double ParticleMeasure::total_mass() const {
    double s = 0.0;
    for (const Atom& a : atoms_) s += a.weight;
    return s;
}

double ParticleMeasure::cdf(double s) const {
    if (!(s >= 0.0 && s <= 1.0))
        throw DomainError("cdf argument outside [0,1]");
    double acc = 0.0;
    for (const Atom& a : atoms_) {
        if (a.pos > s) break;
        acc += a.weight;
    }
    return acc;
}

ParticleMeasure ParticleMeasure::canonical() const {
    std::vector<Atom> merged;
    merged.reserve(atoms_.size());
    for (const Atom& a : atoms_) {
        if (!merged.empty() && merged.back().pos == a.pos) {
            Atom& b = merged.back();
            b.weight += a.weight;
            // a cell absorbs a co-located point; the cell geometry wins
            if (a.kind == AtomKind::GridCell && b.kind == AtomKind::PointAtom) {
                b.kind = AtomKind::GridCell;
                b.cell_width = a.cell_width;
            }
        } else {
            merged.push_back(a);
        }
    }
    double pruned = 0.0;
    std::vector<Atom> kept;
    kept.reserve(merged.size());
    for (const Atom& a : merged) {
        if (a.weight < kWeightFloor)
            pruned += a.weight;
        else
            kept.push_back(a);
    }
    if (kept.empty()) throw ValidationError("canonicalization removed all atoms");
    double mass = 0.0;
    for (const Atom& a : kept) mass += a.weight;
    for (Atom& a : kept) a.weight /= mass;
    ParticleMeasure out;
    out.atoms_ = std::move(kept);
    out.pruned_mass_ = pruned;
    return out;
}

bool ParticleMeasure::operator==(const ParticleMeasure& other) const {
    ParticleMeasure a = canonical();
    ParticleMeasure b = other.canonical();
    if (a.atoms_.size() != b.atoms_.size()) return false;
    for (std::size_t i = 0; i < a.atoms_.size(); ++i)
        if (a.atoms_[i].pos != b.atoms_[i].pos || a.atoms_[i].weight != b.atoms_[i].weight)
            return false;
    return true;
}

LipschitzTestFunction::LipschitzTestFunction(std::function<double(double)> f,
                                             double lipschitz_bound)
    : f_(std::move(f)), bound_(lipschitz_bound) {
    if (!(bound_ >= 0.0)) throw ValidationError("Lipschitz bound must be >= 0");
}

LipschitzTestFunction LipschitzTestFunction::piecewise_linear(std::vector<double> breaks,
                                                              std::vector<double> values) {
    if (breaks.size() != values.size() || breaks.size() < 2)
        throw ValidationError("piecewise_linear needs matching lists of >= 2 points");
    for (std::size_t i = 1; i < breaks.size(); ++i)
        if (!(breaks[i] > breaks[i - 1]))
            throw ValidationError("piecewise_linear breakpoints must increase");
    double bound = 0.0;
    for (std::size_t i = 1; i < breaks.size(); ++i)
        bound = std::max(bound, std::abs(values[i] - values[i - 1]) / (breaks[i] - breaks[i - 1]));
    auto eval = [breaks = std::move(breaks), values = std::move(values)](double a) {
        if (a <= breaks.front()) return values.front();
        if (a >= breaks.back()) return values.back();
        auto it = std::upper_bound(breaks.begin(), breaks.end(), a);
        std::size_t i = static_cast<std::size_t>(it - breaks.begin());
        double t = (a - breaks[i - 1]) / (breaks[i] - breaks[i - 1]);
        return values[i - 1] + t * (values[i] - values[i - 1]);
    };
    return LipschitzTestFunction(std::move(eval), bound);
}

double LipschitzTestFunction::verify_on_grid(int n) const {
    if (n < 2) throw ValidationError("verify_on_grid needs n >= 2");
    const double h = 1.0 / (n - 1);
    double max_slope = 0.0;
    double prev = f_(0.0);
    for (int i = 1; i < n; ++i) {
        double cur = f_(i * h);
        max_slope = std::max(max_slope, std::abs(cur - prev) / h);
        prev = cur;
    }
    if (max_slope > bound_ + 1e-9)
        throw ValidationError("sampled slope " + std::to_string(max_slope) +
                              " exceeds declared Lipschitz bound " + std::to_string(bound_));
    return max_slope;
}

double pair(const ParticleMeasure& mu, const std::function<double(double)>& h) {
    double s = 0.0;
    for (const Atom& a : mu.atoms()) s += a.weight * h(a.pos);
    return s;
}

double wasserstein1(const ParticleMeasure& mu, const ParticleMeasure& nu) {
    const auto& am = mu.atoms();
    const auto& an = nu.atoms();
    // walk the merged breakpoints; between breakpoints both CDFs are constant
    double w1 = 0.0;
    double fm = 0.0, fn = 0.0;
    double prev = 0.0;
    std::size_t i = 0, j = 0;
    while (i < am.size() || j < an.size()) {
        double x;
        if (j >= an.size() || (i < am.size() && am[i].pos <= an[j].pos))
            x = am[i].pos;
        else
            x = an[j].pos;
        w1 += std::abs(fm - fn) * (x - prev);
        while (i < am.size() && am[i].pos == x) fm += am[i++].weight;
        while (j < an.size() && an[j].pos == x) fn += an[j++].weight;
        prev = x;
    }
    w1 += std::abs(fm - fn) * (1.0 - prev);
    return w1;
}

double wasserstein_lp_oracle(const ParticleMeasure& mu, const ParticleMeasure& nu) {
    if (mu.size() > kLpOracleAtomLimit || nu.size() > kLpOracleAtomLimit)
        throw CapacityError("lp oracle limited to " + std::to_string(kLpOracleAtomLimit) +
                            " atoms per measure");
    const auto& am = mu.atoms();
    const auto& an = nu.atoms();
    // north-west corner on sorted supports = monotone coupling, optimal for |x-y|
    double cost = 0.0;
    std::size_t i = 0, j = 0;
    double ri = am.empty() ? 0.0 : am[0].weight;
    double rj = an.empty() ? 0.0 : an[0].weight;
    while (i < am.size() && j < an.size()) {
        double moved = std::min(ri, rj);
        cost += moved * std::abs(am[i].pos - an[j].pos);
        ri -= moved;
        rj -= moved;
        if (ri <= 0.0) {
            ++i;
            if (i < am.size()) ri = am[i].weight;
        }
        if (rj <= 0.0) {
            ++j;
            if (j < an.size()) rj = an[j].weight;
        }
    }
    return cost;
}

ParticleMeasure push_forward(const ParticleMeasure& mu,
                             const std::function<double(double)>& phi) {
    std::vector<Atom> out;
    out.reserve(mu.size());
    double prev = -1.0;
    for (const Atom& a : mu.atoms()) {
        Atom b = a;
        b.pos = phi(a.pos);
        if (!(b.pos >= 0.0 && b.pos <= 1.0))
            throw DomainError("push_forward map left [0,1] at " + std::to_string(a.pos));
        if (b.pos < prev)
            throw ValidationError("push_forward map is not nondecreasing");
        prev = b.pos;
        out.push_back(b);
    }
    return ParticleMeasure(std::move(out));
}

double duality_lower_bound(const ParticleMeasure& mu, const ParticleMeasure& nu,
                           const LipschitzTestFunction& phi) {
    if (phi.lipschitz_bound() > 1.0)
        throw ValidationError("duality_lower_bound requires a 1-Lipschitz potential");
    auto f = [&phi](double a) { return phi(a); };
    return pair(mu, f) - pair(nu, f);
}

void write_measure_csv(std::ostream& out, const ParticleMeasure& mu) {
    out << "position,weight,kind\n";
    char buf[80];
    for (const Atom& a : mu.atoms()) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%s\n", a.pos, a.weight,
                      a.kind == AtomKind::PointAtom ? "point" : "cell");
        out << buf;
    }
}

ParticleMeasure read_measure_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("empty measure csv");
    std::vector<Atom> atoms;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string pos_s, w_s, kind_s;
        if (!std::getline(ss, pos_s, ',') || !std::getline(ss, w_s, ',') ||
            !std::getline(ss, kind_s))
            throw ValidationError("malformed measure csv line: " + line);
        Atom a;
        a.pos = std::stod(pos_s);
        a.weight = std::stod(w_s);
        if (kind_s == "point")
            a.kind = AtomKind::PointAtom;
        else if (kind_s == "cell")
            a.kind = AtomKind::GridCell;
        else
            throw ValidationError("unknown atom kind: " + kind_s);
        atoms.push_back(a);
    }
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& a, const Atom& b) { return a.pos < b.pos; });
    return ParticleMeasure(std::move(atoms)).canonical();
}

}  // namespace adsim

#pragma once

// Power-cell quadratic programs solved from Gram data only.
//
// For landmarks z_i with powers p_i, w_i(x) = |x - z_i|^2 - p_i. Given a
// simplex sigma with base vertex i0, we minimise w_i0 over
//   V_sigma = { x : w_i0(x) = w_j(x), j in sigma;  w_i0(x) <= w_k(x), k not in sigma }.
// Writing x = z_i0 + y and d_k = z_k - z_i0, every constraint is linear:
//   d_k . y <= e_k,   e_k = (|d_k|^2 + p_i0 - p_k) / 2,
// and the objective is |y|^2 - p_i0. The minimiser lies in the span of the
// active normals, so y is stored as coefficients over the d_k and every inner
// product is read from the Gram matrix G_ij = z_i . z_j.
//
// The solver is a dual active-set (Goldfarb-Idnani) iteration: start at the
// equality-constrained minimiser, then add the most violated inequality while
// keeping the active multipliers nonnegative. A violated constraint whose
// normal lies in the span of the active set with no droppable multiplier is a
// certificate that the cell intersection is empty.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "densfilt/mixture.hpp"

namespace densfilt {

/// Gram matrix of landmark positions together with their powers.
class GramSystem {
public:
    /// Validates symmetry and positive semidefiniteness of a caller-supplied Gram matrix.
    GramSystem(Matrix gram, std::vector<double> powers) : gram_(std::move(gram)), powers_(std::move(powers))
    {
        check_shape();
        const double scale = std::max(1.0, gram_.cwiseAbs().maxCoeff());
        if ((gram_ - gram_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw InputError("Gram matrix is not symmetric");
        Eigen::SelfAdjointEigenSolver<Matrix> eig(gram_, Eigen::EigenvaluesOnly);
        if (eig.eigenvalues().minCoeff() < -1e-9 * std::max(1.0, gram_.trace()))
            throw InputError("Gram matrix is not positive semidefinite");
        init_scale();
    }

    /// Builds the Gram matrix of explicit coordinates, centred at their mean
    /// (power distances are translation invariant).
    static GramSystem from_points(const PointCloud& points, std::vector<double> powers)
    {
        RowMatrix centred = points.matrix();
        const Eigen::RowVectorXd mean = centred.colwise().mean();
        centred.rowwise() -= mean;
        Matrix g = centred * centred.transpose();
        g = 0.5 * (g + g.transpose()).eval();
        return GramSystem(std::move(g), std::move(powers), trusted{});
    }

    std::size_t size() const { return static_cast<std::size_t>(gram_.rows()); }
    const Matrix& gram() const { return gram_; }
    const std::vector<double>& powers() const { return powers_; }
    double g(std::size_t i, std::size_t j) const { return gram_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); }
    /// Mean squared landmark norm, floored at 1; multiplies solver tolerances.
    double tolerance_scale() const { return tol_scale_; }

private:
    struct trusted {};
    GramSystem(Matrix gram, std::vector<double> powers, trusted) : gram_(std::move(gram)), powers_(std::move(powers))
    {
        check_shape();
        init_scale();
    }
    void check_shape() const
    {
        if (gram_.rows() != gram_.cols()) throw InputError("Gram matrix must be square");
        if (static_cast<std::size_t>(gram_.rows()) != powers_.size()) throw InputError("power count does not match Gram size");
        if (powers_.empty()) throw InputError("power system is empty");
        if (!gram_.allFinite()) throw InputError("Gram matrix has non-finite entries");
    }
    void init_scale() { tol_scale_ = std::max(1.0, gram_.trace() / static_cast<double>(gram_.rows())); }

    Matrix gram_;
    std::vector<double> powers_;
    double tol_scale_ = 1.0;
};

/// One cell-intersection program: minimise w_base over V_sigma.
struct CellProblem {
    const GramSystem* system = nullptr;
    std::size_t base = 0;
    std::vector<std::size_t> equalities;
    std::vector<std::size_t> inequalities;

    /// Problem for simplex `sigma` (distinct indices) with sigma[base_pos] as base
    /// and every other landmark as an inequality.
    static CellProblem for_simplex(const GramSystem& system, std::span<const std::size_t> sigma, std::size_t base_pos = 0)
    {
        if (sigma.empty()) throw InputError("simplex must have at least one vertex");
        if (base_pos >= sigma.size()) throw InputError("base position outside simplex");
        CellProblem p;
        p.system = &system;
        p.base = sigma[base_pos];
        std::vector<char> in_sigma(system.size(), 0);
        for (std::size_t v : sigma) {
            if (v >= system.size()) throw InputError("simplex vertex out of range");
            if (in_sigma[v]) throw InputError("simplex has repeated vertex");
            in_sigma[v] = 1;
        }
        for (std::size_t v : sigma)
            if (v != p.base) p.equalities.push_back(v);
        for (std::size_t k = 0; k < system.size(); ++k)
            if (!in_sigma[k]) p.inequalities.push_back(k);
        return p;
    }
};

enum class QpStatus {
    feasible,
    infeasible,
    above_cap, ///< objective provably exceeds the requested cap; solve stopped early
};

inline const char* to_string(QpStatus s)
{
    switch (s) {
    case QpStatus::feasible: return "feasible";
    case QpStatus::infeasible: return "infeasible";
    case QpStatus::above_cap: return "above_cap";
    }
    return "unknown";
}

struct AffineTerm {
    std::size_t index;
    double weight;
};

struct QpSolution {
    QpStatus status = QpStatus::infeasible;
    /// q = sum weight * z_index, weights summing to 1
    std::vector<AffineTerm> minimizer;
    /// min over V_sigma of w_base, squared-distance units
    double objective = std::numeric_limits<double>::quiet_NaN();
    /// tight inequality constraints at the optimum with their multipliers
    std::vector<std::size_t> active_set;
    std::vector<double> multipliers;
    double kkt_residual = 0.0;
    std::size_t iterations = 0;

    bool feasible() const { return status == QpStatus::feasible; }

    Vector point(const PointCloud& landmarks) const
    {
        Vector q = Vector::Zero(static_cast<Eigen::Index>(landmarks.dim()));
        for (const auto& t : minimizer)
            for (std::size_t k = 0; k < landmarks.dim(); ++k) q[static_cast<Eigen::Index>(k)] += t.weight * landmarks.point(t.index)[k];
        return q;
    }
};

struct QpOptions {
    /// feasibility tolerance in squared-distance units, scaled by GramSystem::tolerance_scale
    double tol = 1e-9;
    /// relative pivot threshold below which a new normal counts as dependent
    double pivot = 1e-14;
    /// stop early once the objective provably exceeds this value
    std::optional<double> objective_cap;
};

namespace detail {

class CellSolver {
public:
    CellSolver(const CellProblem& p, const QpOptions& opt) : p_(p), sys_(*p.system), opt_(opt)
    {
        const std::size_t n = sys_.size();
        if (p.base >= n) throw InputError("base index out of range");
        std::vector<char> seen(n, 0);
        seen[p.base] = 1;
        for (auto idx : {std::span<const std::size_t>(p.equalities), std::span<const std::size_t>(p.inequalities)})
            for (std::size_t k : idx) {
                if (k >= n) throw InputError("constraint index out of range");
                if (seen[k]) throw InputError("constraint index repeated or equal to base");
                seen[k] = 1;
            }
        tol_ = opt.tol * sys_.tolerance_scale();
        coef_.assign(n, 0.0);
        g00_ = sys_.g(p.base, p.base);
        p0_ = sys_.powers()[p.base];
    }

    QpSolution solve()
    {
        QpSolution sol;
        const std::size_t n_constraints = p_.equalities.size() + p_.inequalities.size();
        max_iter_ = std::max<std::size_t>(10 * n_constraints, 10);

        for (std::size_t k : p_.equalities) {
            if (!add_constraint(k, true)) {
                sol.status = QpStatus::infeasible;
                sol.iterations = iter_;
                return sol;
            }
        }
        if (cap_exceeded()) return stopped(QpStatus::above_cap);

        for (;;) {
            // most violated inequality; ties to the earliest listed
            std::size_t worst = npos;
            double worst_slack = -tol_;
            for (std::size_t k : p_.inequalities) {
                if (in_active(k)) continue;
                const double s = slack(k);
                if (s < worst_slack) {
                    worst_slack = s;
                    worst = k;
                }
            }
            if (worst == npos) break;
            if (!add_constraint(worst, false)) return stopped(QpStatus::infeasible);
            if (cap_exceeded()) return stopped(QpStatus::above_cap);
        }

        sol.status = QpStatus::feasible;
        sol.iterations = iter_;
        sol.objective = norm2() - p0_;
        double csum = 0.0;
        for (std::size_t k : support_) {
            if (coef_[k] != 0.0) sol.minimizer.push_back({k, coef_[k]});
            csum += coef_[k];
        }
        sol.minimizer.insert(sol.minimizer.begin(), AffineTerm{p_.base, 1.0 - csum});
        std::sort(sol.minimizer.begin(), sol.minimizer.end(), [](const AffineTerm& a, const AffineTerm& b) { return a.index < b.index; });
        for (std::size_t a = 0; a < active_.size(); ++a) {
            if (!equality_[a]) {
                sol.active_set.push_back(active_[a]);
                sol.multipliers.push_back(mult_[a]);
            }
        }
        sol.kkt_residual = kkt_residual();
        return sol;
    }

private:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    // M_jk = d_j . d_k
    double m(std::size_t j, std::size_t k) const
    {
        return sys_.g(j, k) - sys_.g(j, p_.base) - sys_.g(p_.base, k) + g00_;
    }
    double rhs(std::size_t k) const { return 0.5 * (m(k, k) + p0_ - sys_.powers()[k]); }
    // d_k . y
    double dot_y(std::size_t k) const
    {
        double s = 0.0;
        for (std::size_t j : support_) s += coef_[j] * m(k, j);
        return s;
    }
    // e_k - d_k . y; negative means violated
    double slack(std::size_t k) const { return rhs(k) - dot_y(k); }
    double norm2() const
    {
        double s = 0.0;
        for (std::size_t j : support_) s += coef_[j] * dot_y(j);
        return std::max(0.0, s);
    }
    bool in_active(std::size_t k) const { return std::find(active_.begin(), active_.end(), k) != active_.end(); }
    void touch(std::size_t k)
    {
        if (std::find(support_.begin(), support_.end(), k) == support_.end()) support_.push_back(k);
    }

    bool cap_exceeded() const
    {
        if (!opt_.objective_cap) return false;
        // the dual iteration only increases |y|^2, so this bound is final
        return norm2() - p0_ > *opt_.objective_cap + tol_;
    }

    QpSolution stopped(QpStatus status) const
    {
        QpSolution s;
        s.status = status;
        s.iterations = iter_;
        if (status == QpStatus::above_cap) s.objective = norm2() - p0_;
        return s;
    }

    /// Adds constraint k to the working set (equality or inequality). Returns
    /// false when the constraint set is certified infeasible.
    bool add_constraint(std::size_t k, bool equality)
    {
        pending_ = 0.0;
        for (;;) {
            if (++iter_ > max_iter_)
                throw SolverError("dual active-set iteration cap of " + std::to_string(max_iter_) + " exceeded (base " +
                                  std::to_string(p_.base) + ", |working set| " + std::to_string(active_.size()) + ")");
            const std::size_t na = active_.size();
            Vector r = Vector::Zero(static_cast<Eigen::Index>(na));
            double znorm2 = m(k, k);
            if (na > 0) {
                Matrix maa(static_cast<Eigen::Index>(na), static_cast<Eigen::Index>(na));
                Vector mak(static_cast<Eigen::Index>(na));
                for (std::size_t a = 0; a < na; ++a) {
                    mak[static_cast<Eigen::Index>(a)] = m(active_[a], k);
                    for (std::size_t b = 0; b < na; ++b)
                        maa(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = m(active_[a], active_[b]);
                }
                r = maa.ldlt().solve(mak);
                znorm2 = m(k, k) - mak.dot(r);
            }
            const double s = slack(k);
            // each d_j . d_k is formed from four Gram entries and so carries
            // rounding on the scale of |z|^2 rather than |d|^2; the projected norm sees it
            // amplified by (1 + |r|_1)^2, large for nearly parallel normals
            double scale = std::max({m(k, k), g00_, sys_.g(k, k)});
            for (std::size_t a = 0; a < na; ++a) scale = std::max(scale, sys_.g(active_[a], active_[a]));
            const double amp = 1.0 + r.cwiseAbs().sum();
            const double floor = 64.0 * std::numeric_limits<double>::epsilon() * scale * amp * amp;
            const bool dependent = !(znorm2 > std::max(opt_.pivot * m(k, k), floor)) || m(k, k) <= 0.0;

            if (equality) {
                if (dependent) {
                    // consistent duplicate of the working set: skip it
                    return std::abs(s) <= tol_;
                }
                // with n = -d: z = -d_k + sum r_a d_a, slack s = n.y - b, full step -s/|z|^2
                const double t = -s / znorm2;
                step(k, r, t);
                active_.push_back(k);
                equality_.push_back(1);
                mult_.push_back(t);
                resync();
                return true;
            }

            // partial step bound from active inequality multipliers
            double t1 = std::numeric_limits<double>::infinity();
            std::size_t block = npos;
            for (std::size_t a = 0; a < na; ++a) {
                if (equality_[a]) continue;
                const double ra = r[static_cast<Eigen::Index>(a)];
                if (ra > 0.0) {
                    const double ratio = mult_[a] / ra;
                    if (ratio < t1) {
                        t1 = ratio;
                        block = a;
                    }
                }
            }
            if (dependent) {
                if (block == npos) return false; // dual unbounded: cell intersection empty
                step_dual_only(k, r, t1);
                drop(block);
                continue;
            }
            const double t2 = -s / znorm2;
            if (t2 <= t1) {
                step(k, r, t2);
                active_.push_back(k);
                equality_.push_back(0);
                mult_.push_back(pending_ + t2);
                pending_ = 0.0;
                resync();
                return true;
            }
            step(k, r, t1);
            pending_ += t1;
            drop(block);
        }
    }

    // y += t z with z = -d_k + sum_a r_a d_a ; active multipliers -= t r
    void step(std::size_t k, const Vector& r, double t)
    {
        touch(k);
        coef_[k] -= t;
        for (std::size_t a = 0; a < active_.size(); ++a) {
            const double ra = r[static_cast<Eigen::Index>(a)];
            coef_[active_[a]] += t * ra;
            mult_[a] -= t * ra;
        }
    }
    // Once a constraint is fully added, y is the minimum-norm point of the
    // active equalities, y = sum_a lambda_a d_a with M_AA lambda = e_A and
    // multipliers -lambda. Recomputing it here drops coefficients left on
    // constraints no longer active, which otherwise grow without bound and
    // cancel when active normals are nearly parallel.
    void resync()
    {
        const std::size_t na = active_.size();
        Matrix maa(static_cast<Eigen::Index>(na), static_cast<Eigen::Index>(na));
        Vector e(static_cast<Eigen::Index>(na));
        for (std::size_t a = 0; a < na; ++a) {
            e[static_cast<Eigen::Index>(a)] = rhs(active_[a]);
            for (std::size_t b = 0; b < na; ++b)
                maa(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = m(active_[a], active_[b]);
        }
        const Vector lambda = maa.ldlt().solve(e);
        if (!lambda.allFinite()) return;
        for (std::size_t k : support_) coef_[k] = 0.0;
        support_ = active_;
        for (std::size_t a = 0; a < na; ++a) {
            coef_[active_[a]] = lambda[static_cast<Eigen::Index>(a)];
            mult_[a] = -lambda[static_cast<Eigen::Index>(a)];
        }
    }
    void step_dual_only(std::size_t, const Vector& r, double t)
    {
        for (std::size_t a = 0; a < active_.size(); ++a) mult_[a] -= t * r[static_cast<Eigen::Index>(a)];
        pending_ += t;
    }
    void drop(std::size_t a)
    {
        active_.erase(active_.begin() + static_cast<std::ptrdiff_t>(a));
        equality_.erase(equality_.begin() + static_cast<std::ptrdiff_t>(a));
        mult_.erase(mult_.begin() + static_cast<std::ptrdiff_t>(a));
    }

    double kkt_residual() const
    {
        // stationarity: y = -sum_a u_a d_a  (n_a = -d_a)
        std::vector<double> w = coef_;
        for (std::size_t a = 0; a < active_.size(); ++a) w[active_[a]] += mult_[a];
        std::vector<std::size_t> supp = support_;
        for (std::size_t k : active_)
            if (std::find(supp.begin(), supp.end(), k) == supp.end()) supp.push_back(k);
        // r = sum_i w_i d_i lies in span(d_supp), so r = 0 iff every r . d_k
        // vanishes; sqrt(r . r) would square-root the rounding of a cancelling sum
        double res = 0.0;
        for (std::size_t k : supp) {
            double rk = 0.0;
            for (std::size_t i : supp) rk += w[i] * m(i, k);
            res = std::max(res, std::abs(rk));
        }
        for (std::size_t k : p_.equalities) res = std::max(res, std::abs(slack(k)));
        for (std::size_t k : p_.inequalities) res = std::max(res, -slack(k));
        for (std::size_t a = 0; a < active_.size(); ++a) {
            if (equality_[a]) continue;
            res = std::max(res, -mult_[a]);
            res = std::max(res, std::abs(mult_[a] * slack(active_[a])));
        }
        return res;
    }

    const CellProblem& p_;
    const GramSystem& sys_;
    QpOptions opt_;
    double tol_ = 0.0;
    double g00_ = 0.0;
    double p0_ = 0.0;
    std::vector<double> coef_;
    std::vector<std::size_t> support_;
    std::vector<std::size_t> active_;
    std::vector<char> equality_;
    std::vector<double> mult_;
    double pending_ = 0.0; // multiplier accumulated by the constraint being added
    std::size_t iter_ = 0;
    std::size_t max_iter_ = 0;
};

} // namespace detail

inline QpSolution solve_cell(const CellProblem& problem, const QpOptions& options = {})
{
    if (problem.system == nullptr) throw InputError("cell problem has no Gram system");
    if (!(options.tol > 0.0)) throw InputError("solver tolerance must be positive");
    return detail::CellSolver(problem, options).solve();
}

enum class Feasibility { nonempty, empty };

inline Feasibility feasibility(const CellProblem& problem, const QpOptions& options = {})
{
    QpOptions o = options;
    o.objective_cap.reset();
    return solve_cell(problem, o).feasible() ? Feasibility::nonempty : Feasibility::empty;
}

} // namespace densfilt

#include "vemstokes/eigensolve.hpp"

#include "vemstokes/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>

namespace vemstokes {

std::string_view to_string(SolveStrategy s)
{
    switch (s) {
    case SolveStrategy::Dense: return "dense";
    case SolveStrategy::ShiftInvert: return "shift_invert";
    case SolveStrategy::Auto: return "auto";
    }
    return "auto";
}

SolveStrategy parse_strategy(std::string_view name)
{
    std::string s(name);
    std::replace(s.begin(), s.end(), '-', '_');
    if (s == "dense") return SolveStrategy::Dense;
    if (s == "shift_invert") return SolveStrategy::ShiftInvert;
    if (s == "auto") return SolveStrategy::Auto;
    throw ConfigError("unknown solver strategy '" + std::string(name) + "' (expected dense, shift_invert or auto)");
}

void SolveOptions::validate() const
{
    if (m < 1) throw ConfigError("m must be at least 1");
    if (!(tol_one > 0.0)) throw ConfigError("tol_one must be positive");
    if (!(shift > 1.0)) throw ConfigError("shift must be greater than 1");
    if (!(lambda_cap > 1.0 + tol_one)) throw ConfigError("lambda_cap must exceed 1 + tol_one");
    if (!(residual_tol > 0.0)) throw ConfigError("residual_tol must be positive");
    if (max_basis < 0) throw ConfigError("max_basis must be non-negative");
}

namespace {

enum class Kind { Cluster, Physical, Infinite, Other };

Kind classify(double lambda, const SolveOptions& opt)
{
    if (std::abs(lambda - 1.0) <= opt.tol_one) return Kind::Cluster;
    if (!(lambda < opt.lambda_cap) || !std::isfinite(lambda)) return Kind::Infinite;
    if (lambda > 1.0 + opt.tol_one) return Kind::Physical;
    return Kind::Other;
}

struct Pair {
    double lambda;
    Eigen::VectorXd x;  // free DOFs
};

SpectrumResult finish(const GlobalSystem& sys, std::vector<Pair> pairs, const SolveOptions& opt, SpectrumResult res)
{
    std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.lambda < b.lambda; });
    if (static_cast<int>(pairs.size()) < opt.m) {
        std::ostringstream os;
        os << "found only " << pairs.size() << " physical eigenvalues below lambda_cap, " << opt.m << " requested";
        throw SolverError(os.str());
    }
    pairs.resize(static_cast<std::size_t>(opt.m));
    res.vectors.resize(sys.dofs.num_global, opt.m);
    for (int i = 0; i < opt.m; ++i) {
        Pair& p = pairs[static_cast<std::size_t>(i)];
        const double anorm = std::sqrt(p.x.dot(sys.A * p.x));
        if (anorm > 0.0) p.x /= anorm;
        res.lambdas.push_back(p.lambda);
        res.eigenvalues.push_back(p.lambda - 1.0);
        res.mu.push_back(1.0 / p.lambda);
        res.vectors.col(i) = sys.dofs.expand(p.x);
    }
    res.residuals = verify_residuals(sys, res, opt.residual_tol).residuals;
    return res;
}

// ---------------------------------------------------------------- dense path

SpectrumResult solve_dense(const GlobalSystem& sys, const SolveOptions& opt)
{
    const int n = sys.n_free;
    if (n > opt.dense_limit) {
        std::ostringstream os;
        os << "dense strategy limited to " << opt.dense_limit << " DOFs (system has " << n << ")";
        throw SolverError(os.str());
    }
    SpectrumResult res;
    res.strategy = SolveStrategy::Dense;

    Eigen::MatrixXd A = Eigen::MatrixXd(sys.A);
    Eigen::MatrixXd B = Eigen::MatrixXd(sys.B);
    const bool rigid = sys.bc_mode == BcMode::Rigid;

    // Rigid mode: restrict to the complement of c with a Householder reflector
    // H (H c = -|c| e_0); the constrained space is spanned by H's columns 1..n-1.
    Eigen::VectorXd v;
    double beta = 0.0;
    if (rigid) {
        const Eigen::VectorXd& c = sys.trace;
        const double cn = c.norm();
        if (cn == 0.0) throw SolverError("trace constraint vector vanishes");
        v = c;
        v(0) += (c(0) >= 0.0 ? cn : -cn);
        beta = 2.0 / v.squaredNorm();
        auto reflect = [&](Eigen::MatrixXd& M) {
            const Eigen::VectorXd w = M * v;
            const double vw = v.dot(w);
            M.noalias() -= beta * v * w.transpose();
            M.noalias() -= beta * w * v.transpose();
            M += (beta * beta * vw) * v * v.transpose();
        };
        reflect(A);
        reflect(B);
        A = A.bottomRightCorner(n - 1, n - 1).eval();
        B = B.bottomRightCorner(n - 1, n - 1).eval();
    }

    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) throw SolverError("A is not positive definite on the constrained space");
    const auto L = llt.matrixL();
    Eigen::MatrixXd X = L.solve(B);
    Eigen::MatrixXd C = L.solve(X.transpose());
    C = 0.5 * (C + C.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
    if (es.info() != Eigen::Success) throw SolverError("dense symmetric eigensolver did not converge");

    std::vector<Pair> pairs;
    const Eigen::VectorXd& mus = es.eigenvalues();
    for (Eigen::Index i = mus.size() - 1; i >= 0; --i) {
        const double mu = mus(i);
        const double lambda = mu > 1.0 / opt.lambda_cap ? 1.0 / mu : std::numeric_limits<double>::infinity();
        switch (classify(lambda, opt)) {
        case Kind::Cluster:
            ++res.cluster_count;
            res.cluster_values.push_back(lambda);
            break;
        case Kind::Infinite: ++res.infinite_count; break;
        case Kind::Other: res.diagnostics.push_back("eigenvalue below 1 - tol_one: " + std::to_string(lambda)); break;
        case Kind::Physical:
            if (static_cast<int>(pairs.size()) < opt.m) {
                Eigen::VectorXd y = L.transpose().solve(es.eigenvectors().col(i));
                if (rigid) {
                    Eigen::VectorXd full(n);
                    full(0) = 0.0;
                    full.tail(n - 1) = y;
                    full -= (beta * v.dot(full)) * v;
                    y = full;
                }
                pairs.push_back({lambda, std::move(y)});
            }
            break;
        }
    }
    res.iterations = 1;
    return finish(sys, std::move(pairs), opt, std::move(res));
}

// ------------------------------------------------------- shift-invert Lanczos

// Rigid mode: K = A - sigma B is singular with kernel x0 (the identity
// tensor). The constrained solve  K y + l c = b, c^T y = 0  is done by fixing
// l from x0^T (b - l c) = 0, solving the consistent system with one DOF pinned,
// then shifting along x0 to satisfy the constraint.
class ShiftInvertOperator {
public:
    ShiftInvertOperator(const GlobalSystem& sys, double sigma) : sys_(sys)
    {
        const int n = sys.n_free;
        SparseMatrix K = sys.A - sigma * sys.B;
        if (sys.bc_mode == BcMode::Rigid) {
            const Eigen::VectorXd& x0 = sys.kernel;
            if (x0.size() != n) throw SolverError("rigid system is missing its kernel vector");
            x0.cwiseAbs().maxCoeff(&pin_);
            const double xc = x0.dot(sys.trace);
            if (std::abs(xc) <= 1e-14 * x0.norm() * sys.trace.norm())
                throw SolverError("trace constraint does not remove the kernel of A");
            using Triplet = Eigen::Triplet<double>;
            std::vector<Triplet> t;
            t.reserve(static_cast<std::size_t>(K.nonZeros()));
            for (int col = 0; col < K.outerSize(); ++col)
                for (SparseMatrix::InnerIterator it(K, col); it; ++it) {
                    if (it.row() == pin_ || it.col() == pin_) continue;
                    t.emplace_back(it.row() - (it.row() > pin_), it.col() - (it.col() > pin_), it.value());
                }
            K.resize(n - 1, n - 1);
            K.setFromTriplets(t.begin(), t.end());
        }
        K.makeCompressed();
        K_ = K;
        lu_.analyzePattern(K);
        lu_.factorize(K);
        ok_ = lu_.info() == Eigen::Success;
        if (ok_) {
            // A singular K may still factor; catch it through the pivots.
            const double logdet = lu_.logAbsDeterminant();
            ok_ = std::isfinite(logdet);
        }
    }

    [[nodiscard]] bool ok() const { return ok_; }

    /// y = (A - sigma B)^{-1} B x on the constrained space.
    [[nodiscard]] Eigen::VectorXd apply(const Eigen::VectorXd& x) const
    {
        const int n = sys_.n_free;
        Eigen::VectorXd b = sys_.B * x;
        if (sys_.bc_mode != BcMode::Rigid) return solve(b);

        const Eigen::VectorXd& x0 = sys_.kernel;
        const Eigen::VectorXd& c = sys_.trace;
        b -= (x0.dot(b) / x0.dot(c)) * c;
        Eigen::VectorXd rhs(n - 1);
        rhs.head(pin_) = b.head(pin_);
        rhs.tail(n - 1 - pin_) = b.tail(n - 1 - pin_);
        const Eigen::VectorXd z = solve(rhs);
        Eigen::VectorXd y(n);
        y.head(pin_) = z.head(pin_);
        y(pin_) = 0.0;
        y.tail(n - 1 - pin_) = z.tail(n - 1 - pin_);
        y -= (c.dot(y) / c.dot(x0)) * x0;
        return y;
    }

private:
    [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const
    {
        // Refinement with an extended-precision residual: the wanted vectors are
        // tiny next to the cluster components the inverse amplifies.
        Eigen::VectorXd y = lu_.solve(rhs);
        for (int it = 0; it < refine_steps_; ++it) {
            Eigen::VectorXd r(rhs.size());
            std::vector<long double> acc(static_cast<std::size_t>(rhs.size()));
            for (Eigen::Index i = 0; i < rhs.size(); ++i) acc[static_cast<std::size_t>(i)] = rhs(i);
            for (int col = 0; col < K_.outerSize(); ++col)
                for (SparseMatrix::InnerIterator e(K_, col); e; ++e)
                    acc[static_cast<std::size_t>(e.row())] -= static_cast<long double>(e.value()) * y(col);
            for (Eigen::Index i = 0; i < rhs.size(); ++i) r(i) = static_cast<double>(acc[static_cast<std::size_t>(i)]);
            y += lu_.solve(r);
        }
        return y;
    }

    const GlobalSystem& sys_;
    SparseMatrix K_;
    int refine_steps_ = 1;
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
    Eigen::Index pin_ = 0;
    bool ok_ = false;
};

double pencil_residual(const GlobalSystem& sys, const Eigen::VectorXd& x)
{
    const Eigen::VectorXd ax = sys.A * x;
    const Eigen::VectorXd bx = sys.B * x;
    const double lambda = x.dot(ax) / x.dot(bx);
    Eigen::VectorXd r = ax - lambda * bx;
    if (sys.bc_mode == BcMode::Rigid) r -= (sys.trace.dot(r) / sys.trace.squaredNorm()) * sys.trace;
    return r.norm() / (ax.norm() + std::abs(lambda) * bx.norm());
}

struct Locked {
    std::vector<Pair> pairs;
    Eigen::MatrixXd X;   // locked vectors (columns), B-orthonormal
    Eigen::MatrixXd BX;  // B times X
};

// x0 lies in ker A and ker B, so B-orthogonalization cannot see rounding
// along it; put the constraint back after every update.
void restore_constraint(const GlobalSystem& sys, Eigen::VectorXd& w)
{
    if (sys.bc_mode != BcMode::Rigid) return;
    w -= (sys.trace.dot(w) / sys.trace.dot(sys.kernel)) * sys.kernel;
}

void orthogonalize(Eigen::VectorXd& w, const Eigen::MatrixXd& V, const Eigen::MatrixXd& BV, int cols)
{
    if (cols == 0) return;
    for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXd h = BV.leftCols(cols).transpose() * w;
        w.noalias() -= V.leftCols(cols) * h;
    }
}

SpectrumResult solve_shift_invert(const GlobalSystem& sys, const SolveOptions& opt)
{
    const int n = sys.n_free;
    SpectrumResult res;
    res.strategy = SolveStrategy::ShiftInvert;

    double sigma = opt.shift;
    std::unique_ptr<ShiftInvertOperator> op;
    for (int attempt = 0; attempt <= 3; ++attempt) {
        op = std::make_unique<ShiftInvertOperator>(sys, sigma);
        if (op->ok()) break;
        res.diagnostics.push_back("factorization failed at shift " + std::to_string(sigma) + "; retrying");
        op.reset();
        sigma *= 1.0 + 1e-3 * (attempt + 1);
    }
    if (!op) throw SolverError("factorization of A - sigma B failed after 3 shift perturbations");
    res.shift_used = sigma;

    const int dim = sys.bc_mode == BcMode::Rigid ? n - 1 : n;
    const int ncv_cap = std::min(opt.max_basis > 0 ? opt.max_basis : std::max(2 * opt.m + 40, 120), dim);
    const double ritz_tol = 1e-11;

    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> normal;
    auto random_vector = [&] {
        Eigen::VectorXd r(n);
        for (int i = 0; i < n; ++i) r(i) = normal(rng);
        return r;
    };

    Locked locked;
    locked.X.resize(n, 0);
    locked.BX.resize(n, 0);
    auto lock = [&](double lambda, const Eigen::VectorXd& x) {
        Eigen::VectorXd w = x;
        orthogonalize(w, locked.X, locked.BX, static_cast<int>(locked.X.cols()));
        restore_constraint(sys, w);
        Eigen::VectorXd bw = sys.B * w;
        const double nb = std::sqrt(std::max(0.0, w.dot(bw)));
        if (!(nb > 0.0)) return;
        w /= nb;
        bw /= nb;
        const double rq = w.dot(sys.A * w);  // B-norm is one
        locked.pairs.push_back({std::isfinite(rq) ? rq : lambda, w});
        const auto k = locked.X.cols();
        locked.X.conservativeResize(n, k + 1);
        locked.BX.conservativeResize(n, k + 1);
        locked.X.col(k) = w;
        locked.BX.col(k) = bw;
    };
    auto mth_locked = [&]() {
        std::vector<double> ls;
        for (const auto& p : locked.pairs) ls.push_back(p.lambda);
        std::sort(ls.begin(), ls.end());
        return static_cast<int>(ls.size()) >= opt.m ? ls[static_cast<std::size_t>(opt.m - 1)]
                                                    : std::numeric_limits<double>::infinity();
    };

    Eigen::VectorXd restart_hint;
    int quiet_passes = 0;
    for (int pass = 0; pass < opt.max_restarts; ++pass) {
        const int nlocked = static_cast<int>(locked.X.cols());
        const int ncv = std::min(ncv_cap, dim - nlocked);
        if (ncv <= 0) break;

        Eigen::MatrixXd V(n, ncv + 1);
        Eigen::MatrixXd BV(n, ncv + 1);
        Eigen::VectorXd alpha = Eigen::VectorXd::Zero(ncv);
        Eigen::VectorXd betas = Eigen::VectorXd::Zero(ncv);

        Eigen::VectorXd start = random_vector();
        if (restart_hint.size() == n) start = restart_hint / restart_hint.norm() + (1e-2 / std::sqrt(double(n))) * start;
        Eigen::VectorXd w = op->apply(start);
        orthogonalize(w, locked.X, locked.BX, nlocked);
        restore_constraint(sys, w);
        Eigen::VectorXd bw = sys.B * w;
        double nb = std::sqrt(std::max(0.0, w.dot(bw)));
        if (!(nb > 0.0)) throw SolverError("Lanczos start vector has zero B-norm");
        V.col(0) = w / nb;
        BV.col(0) = bw / nb;

        const double lambda_m_before = mth_locked();
        std::vector<std::pair<double, Eigen::VectorXd>> converged;
        bool done = false;
        int j = 0;
        for (; j < ncv && !done; ++j) {
            w = op->apply(V.col(j));
            ++res.iterations;
            alpha(j) = BV.col(j).dot(w);
            w -= alpha(j) * V.col(j);
            if (j > 0) w -= betas(j - 1) * V.col(j - 1);
            orthogonalize(w, locked.X, locked.BX, nlocked);
            orthogonalize(w, V, BV, j + 1);
            restore_constraint(sys, w);
            bw = sys.B * w;
            const double b = std::sqrt(std::max(0.0, w.dot(bw)));
            betas(j) = b;
            const bool breakdown = b <= 1e-13 * std::max(std::abs(alpha(j)), 1e-300);
            if (!breakdown) {
                V.col(j + 1) = w / b;
                BV.col(j + 1) = bw / b;
            }
            const int size = j + 1;
            const bool check = breakdown || size == ncv || (size >= std::min(ncv, opt.m + 10) && size % 5 == 0);
            if (!check) continue;

            Eigen::MatrixXd T = Eigen::MatrixXd::Zero(size, size);
            for (int i = 0; i < size; ++i) {
                T(i, i) = alpha(i);
                if (i + 1 < size) T(i, i + 1) = T(i + 1, i) = betas(i);
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
            struct Ritz {
                double lambda;
                int idx;
                bool conv;
                double est;
                double theta;
            };
            std::vector<Ritz> wanted;
            int cluster = 0;
            int infinite = 0;
            for (int i = 0; i < size; ++i) {
                const double theta = es.eigenvalues()(i);
                const double lambda = theta != 0.0 ? sigma + 1.0 / theta : std::numeric_limits<double>::infinity();
                const double est = breakdown ? 0.0 : std::abs(b * es.eigenvectors()(size - 1, i));
                const bool conv = est <= ritz_tol * std::abs(theta);
                const Kind kind = classify(lambda, opt);
                if (kind == Kind::Physical) wanted.push_back({lambda, i, conv, est, theta});
                else if (conv && kind == Kind::Cluster) ++cluster;
                else if (conv && kind == Kind::Infinite) ++infinite;
            }
            std::sort(wanted.begin(), wanted.end(), [](const Ritz& a, const Ritz& c) { return a.lambda < c.lambda; });
            const int need = std::max(1, opt.m - nlocked);
            bool ok = static_cast<int>(wanted.size()) >= std::min(need, size);
            for (std::size_t i = 0; ok && i < wanted.size(); ++i) {
                const bool required = static_cast<int>(i) < need ||
                                      (std::isfinite(lambda_m_before) && wanted[i].lambda <= lambda_m_before);
                if (!required) break;
                // A deflation pass only has to show that nothing is left below
                // the current m-th value.
                if (nlocked >= opt.m && i == 0 && wanted[i].lambda > lambda_m_before * (1.0 + 1e-6) &&
                    wanted[i].est <= 1e-6 * std::abs(wanted[i].theta)) {
                    wanted[i].conv = true;
                    break;
                }
                // The Ritz estimate lives in the shift-inverted norm; confirm on the pencil itself.
                if (wanted[i].conv && !breakdown && size < ncv) {
                    const Eigen::VectorXd x = V.leftCols(size) * es.eigenvectors().col(wanted[i].idx);
                    wanted[i].conv = pencil_residual(sys, x) <= 0.1 * opt.residual_tol;
                }
                if (!wanted[i].conv) ok = false;
            }
            if (!(ok || breakdown || size == ncv)) continue;

            done = true;
            if (pass == 0 || ok) {
                res.cluster_count += cluster;
                res.infinite_count += infinite;
            }
            converged.clear();
            restart_hint = Eigen::VectorXd::Zero(n);
            int hinted = 0;
            for (const Ritz& r : wanted) {
                const Eigen::VectorXd x = V.leftCols(size) * es.eigenvectors().col(r.idx);
                if (r.conv) converged.emplace_back(r.lambda, x);
                else if (hinted++ < opt.m) restart_hint += x;
            }
        }

        // Lock the converged values that can still matter.
        const double bound = std::max(lambda_m_before, 0.0);
        int added_below = 0;
        int added = 0;
        for (auto& [lambda, x] : converged) {
            const bool useful = static_cast<int>(locked.pairs.size()) < opt.m || lambda <= bound * (1.0 + 1e-9);
            if (!useful) continue;
            lock(lambda, x);
            ++added;
            if (std::isfinite(lambda_m_before) && lambda <= lambda_m_before * (1.0 + 1e-9)) ++added_below;
        }
        if (restart_hint.size() == n && restart_hint.norm() == 0.0) restart_hint.resize(0);

        const bool enough = static_cast<int>(locked.pairs.size()) >= opt.m;
        if (enough && pass > 0 && added_below == 0 && std::isfinite(lambda_m_before)) {
            ++quiet_passes;
            if (quiet_passes >= 1) break;
        }
        if (added == 0 && !enough && restart_hint.size() == 0) {
            throw SolverError("Lanczos made no progress; fewer physical eigenvalues than requested below lambda_cap");
        }
    }
    if (static_cast<int>(locked.pairs.size()) < opt.m)
        throw SolverError("shift-invert Lanczos did not converge within the restart limit");

    return finish(sys, std::move(locked.pairs), opt, std::move(res));
}

} // namespace

SpectrumResult solve_spectrum(const GlobalSystem& system, const SolveOptions& options)
{
    options.validate();
    if (system.n_free == 0) throw SolverError("system has no free degrees of freedom");
    if (system.bc_mode == BcMode::Rigid && system.trace.size() != system.n_free)
        throw SolverError("rigid system is missing its trace constraint");
    SolveStrategy s = options.strategy;
    if (s == SolveStrategy::Auto) s = system.n_free <= options.auto_dense_below ? SolveStrategy::Dense : SolveStrategy::ShiftInvert;
    SpectrumResult r = s == SolveStrategy::Dense ? solve_dense(system, options) : solve_shift_invert(system, options);
    r.diagnostics.insert(r.diagnostics.end(), system.diagnostics.begin(), system.diagnostics.end());
    return r;
}

ResidualReport verify_residuals(const GlobalSystem& system, const SpectrumResult& result, double tol)
{
    ResidualReport rep;
    const bool rigid = system.bc_mode == BcMode::Rigid;
    for (Eigen::Index i = 0; i < result.vectors.cols(); ++i) {
        const Eigen::VectorXd x = system.dofs.restrict_to_free(result.vectors.col(i));
        const double lambda = result.lambdas[static_cast<std::size_t>(i)];
        const Eigen::VectorXd ax = system.A * x;
        const Eigen::VectorXd bx = system.B * x;
        Eigen::VectorXd r = ax - lambda * bx;
        if (rigid) {
            const double cc = system.trace.squaredNorm();
            r -= (system.trace.dot(r) / cc) * system.trace;
            rep.constraint.push_back(std::abs(system.trace.dot(x)) / std::max(x.norm(), 1e-300));
        }
        const double denom = ax.norm() + std::abs(lambda) * bx.norm();
        const double res = denom > 0.0 ? r.norm() / denom : r.norm();
        rep.residuals.push_back(res);
        const bool constraint_ok = !rigid || rep.constraint.back() <= 1e-10;
        if (!(res <= tol) || !constraint_ok) rep.failed.push_back(static_cast<int>(i));
    }
    return rep;
}

std::string spectrum_to_json(const SpectrumResult& result, const SolveOptions& options)
{
    nlohmann::ordered_json j;
    j["eigenvalues"] = result.eigenvalues;
    j["lambda"] = result.lambdas;
    j["mu"] = result.mu;
    j["residuals"] = result.residuals;
    j["cluster"] = {{"count", result.cluster_count},
                    {"max_deviation",
                     result.cluster_values.empty()
                         ? 0.0
                         : std::abs(*std::max_element(result.cluster_values.begin(), result.cluster_values.end(),
                                                      [](double a, double b) {
                                                          return std::abs(a - 1.0) < std::abs(b - 1.0);
                                                      }) -
                                    1.0)},
                    {"infinite", result.infinite_count}};
    j["strategy"] = std::string(to_string(result.strategy));
    j["shift_used"] = result.shift_used;
    j["iterations"] = result.iterations;
    j["options"] = {{"m", options.m},
                    {"tol_one", options.tol_one},
                    {"lambda_cap", options.lambda_cap},
                    {"residual_tol", options.residual_tol},
                    {"strategy", std::string(to_string(options.strategy))},
                    {"shift", options.shift},
                    {"seed", options.seed}};
    j["diagnostics"] = result.diagnostics;
    return j.dump(2);
}

namespace {

void put_le(std::ostream& os, std::uint64_t bits)
{
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_le(std::istream& is)
{
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) throw IoError("truncated eigenvector file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

} // namespace

void write_eigenvectors(const SpectrumResult& result, const std::string& path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    put_le(os, static_cast<std::uint64_t>(result.vectors.rows()));
    put_le(os, static_cast<std::uint64_t>(result.vectors.cols()));
    for (Eigen::Index c = 0; c < result.vectors.cols(); ++c)
        for (Eigen::Index r = 0; r < result.vectors.rows(); ++r) put_le(os, std::bit_cast<std::uint64_t>(result.vectors(r, c)));
    if (!os) throw IoError("failed writing '" + path + "'");
}

Eigen::MatrixXd read_eigenvectors(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path + "'");
    const auto rows = get_le(is);
    const auto cols = get_le(is);
    if (rows > (1ULL << 32) || cols > (1ULL << 20)) throw IoError("implausible eigenvector header in '" + path + "'");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = std::bit_cast<double>(get_le(is));
    return m;
}

} // namespace vemstokes

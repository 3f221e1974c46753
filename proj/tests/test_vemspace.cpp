#include "oracles.hpp"

#include "vemstokes/error.hpp"
#include "vemstokes/quadrature.hpp"
#include "vemstokes/vemspace.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <gtest/gtest.h>

using namespace vemstokes;

using vstest::integrate;
using vstest::l2_projection;
using vstest::params_k;
using vstest::sample_cells;

TEST(VemParams, Validation)
{
    VemParams p;
    EXPECT_NO_THROW(p.validate());
    p.k = -1;
    EXPECT_THROW(p.validate(), ConfigError);
    p.k = 0;
    p.stab_scale = 0.0;
    EXPECT_THROW(p.validate(), ConfigError);
}

TEST(LocalSpace, LayoutCounts)
{
    const LocalSpace sq(vstest::unit_square_cell(), 0, params_k(0));
    EXPECT_EQ(sq.layout().scalar_size(), 4);
    EXPECT_EQ(sq.layout().tensor_size(), 8);
    EXPECT_EQ(sq.layout().num_interior(), 0);
    const LocalSpace hex(vstest::regular_polygon(6, 1.0), 0, params_k(2));
    EXPECT_EQ(hex.layout().num_edge_dofs(), 18);
    EXPECT_EQ(hex.layout().num_grad, 5);
    EXPECT_EQ(hex.layout().num_complement, 3);
}

TEST(Interpolation, IdentityOnUnitSquare)
{
    const LocalSpace sq(vstest::unit_square_cell(), 0, params_k(0));
    const Eigen::VectorXd d = dofs_of_tensor_field(sq, [](const Point&) { return Tensor::Identity(); });
    const Eigen::Vector4d row0(0, 1, 0, -1), row1(-1, 0, 1, 0);
    EXPECT_NEAR((d.head(4) - row0).norm(), 0.0, 1e-15);
    EXPECT_NEAR((d.tail(4) - row1).norm(), 0.0, 1e-15);
    const Eigen::VectorXd z = dofs_of_tensor_field(sq, [](const Point&) { return Tensor::Zero().eval(); });
    EXPECT_EQ(z.norm(), 0.0);
}

TEST(Interpolation, LinearFieldOnUnitSquare)
{
    const LocalSpace sq(vstest::unit_square_cell(), 0, params_k(0));
    const TensorField f = [](const Point& x) {
        Tensor t = Tensor::Zero();
        t(0, 0) = x.x();
        return t;
    };
    const Eigen::VectorXd d = dofs_of_tensor_field(sq, f);
    EXPECT_NEAR((d.head(4) - Eigen::Vector4d(0, 1, 0, 0)).norm(), 0.0, 1e-15);
    EXPECT_NEAR(d.tail(4).norm(), 0.0, 1e-15);

    const Eigen::VectorXd div = div_from_dofs(sq, d);
    EXPECT_NEAR(div(0), 1.0, 1e-14);
    EXPECT_NEAR(div(1), 0.0, 1e-14);

    const Eigen::VectorXd pi = build_projector(sq) * d;
    const Tensor p = evaluate_tensor(sq.pk(), pi, Point(0.3, 0.8));
    EXPECT_NEAR(p(0, 0), 0.5, 1e-14);
    EXPECT_NEAR(p(0, 1), 0.0, 1e-14);
    EXPECT_NEAR(p(1, 0), 0.0, 1e-14);
    EXPECT_NEAR(p(1, 1), 0.0, 1e-14);
}

TEST(Divergence, ConstantTensorHasZeroDivergence)
{
    for (const auto& [mesh, c] : sample_cells()) {
        const LocalSpace s(mesh, c, params_k(1));
        Tensor k;
        k << 1.5, -0.3, 2.0, 0.7;
        const Eigen::VectorXd d = dofs_of_tensor_field(s, [k](const Point&) { return k; });
        EXPECT_NEAR(div_from_dofs(s, d).norm(), 0.0, 1e-12);
    }
}

TEST(Divergence, RandomP1TensorAtK1)
{
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    for (const auto& [mesh, c] : sample_cells()) {
        const LocalSpace s(mesh, c, params_k(1));
        Eigen::Matrix<double, 2, 3> r0, r1;  // rows: a + b x + c y per entry
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 3; ++j) {
                r0(i, j) = n(rng);
                r1(i, j) = n(rng);
            }
        const TensorField f = [&](const Point& x) {
            Tensor t;
            t(0, 0) = r0(0, 0) + r0(0, 1) * x.x() + r0(0, 2) * x.y();
            t(0, 1) = r0(1, 0) + r0(1, 1) * x.x() + r0(1, 2) * x.y();
            t(1, 0) = r1(0, 0) + r1(0, 1) * x.x() + r1(0, 2) * x.y();
            t(1, 1) = r1(1, 0) + r1(1, 1) * x.x() + r1(1, 2) * x.y();
            return t;
        };
        const Eigen::VectorXd div = div_from_dofs(s, dofs_of_tensor_field(s, f));
        // exact divergence is constant: d/dx t00 + d/dy t01
        const double d0 = r0(0, 1) + r0(1, 2), d1 = r1(0, 1) + r1(1, 2);
        const int nk = s.pk().size();
        EXPECT_NEAR(div(0), d0, 1e-11);
        EXPECT_NEAR(div(nk), d1, 1e-11);
        EXPECT_NEAR(div.segment(1, nk - 1).norm() + div.segment(nk + 1, nk - 1).norm(), 0.0, 1e-11);
    }
}

TEST(Projector, ReproducesPolynomials)
{
    for (int k = 0; k <= 2; ++k)
        for (const auto& [mesh, c] : sample_cells()) {
            const LocalSpace s(mesh, c, params_k(k));
            const Eigen::MatrixXd pi = build_projector(s);
            const Eigen::MatrixXd pd = polynomial_dofs(s);
            const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(pd.cols(), pd.cols());
            EXPECT_LE((pi * pd - id).cwiseAbs().maxCoeff(), 1e-12) << "k=" << k;
        }
}

TEST(Projector, IsIdempotent)
{
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int k = 0; k <= 2; ++k)
        for (const auto& [mesh, c] : sample_cells()) {
            const LocalSpace s(mesh, c, params_k(k));
            const LocalElementOperators ops = build_local_operators(s);
            Eigen::VectorXd x(s.layout().tensor_size());
            for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = n(rng);
            const Eigen::VectorXd once = ops.projector * x;
            const Eigen::VectorXd twice = ops.projector * (ops.poly_dofs * once);
            EXPECT_LE((twice - once).norm(), 1e-12 * std::max(1.0, once.norm()));
        }
}

TEST(Projector, IsTheL2ProjectionAndIsStable)
{
    std::mt19937_64 rng(3);
    for (const auto& [mesh, c] : sample_cells()) {
        const LocalSpace s(mesh, c, params_k(0));
        const vstest::Rt0Tensor tau = vstest::random_rt0(rng, s.centroid());
        const Eigen::VectorXd pi = build_projector(s) * dofs_of_tensor_field(s, tau);
        EXPECT_LE((pi - l2_projection(s, tau)).norm(), 1e-12 * pi.norm());

        const QuadratureRule q = polygon_quadrature(s.polygon(), s.centroid(), 6);
        const double full = integrate(q, [&](const Point& x) { return tau(x).squaredNorm(); });
        const double proj = integrate(q, [&](const Point& x) { return evaluate_tensor(s.pk(), pi, x).squaredNorm(); });
        EXPECT_LE(std::sqrt(proj), std::sqrt(full) * (1.0 + 1e-12));
    }
}

TEST(Projector, DeviatoricOrthogonalityIdentity)
{
    std::mt19937_64 rng(13);
    for (const auto& [mesh, c] : sample_cells()) {
        const LocalSpace s(mesh, c, params_k(0));
        const vstest::Rt0Tensor tau = vstest::random_rt0(rng, s.centroid());
        const TensorField rho = vstest::smooth_field;
        const Eigen::VectorXd pt = build_projector(s) * dofs_of_tensor_field(s, tau);
        const Eigen::VectorXd pr = l2_projection(s, rho);
        const QuadratureRule q = polygon_quadrature(s.polygon(), s.centroid(), 12);
        const double lhs = integrate(q, [&](const Point& x) {
            return deviatoric(evaluate_tensor(s.pk(), pt, x)).cwiseProduct(deviatoric(evaluate_tensor(s.pk(), pr, x))).sum();
        });
        const double rhs = integrate(q, [&](const Point& x) {
            return deviatoric(evaluate_tensor(s.pk(), pt, x)).cwiseProduct(deviatoric(rho(x))).sum();
        });
        EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(lhs)) + 1e-13);
    }
}

TEST(LocalOperators, PolynomialConsistency)
{
    for (int k = 0; k <= 1; ++k)
        for (const auto& [mesh, c] : sample_cells()) {
            const LocalSpace s(mesh, c, params_k(k));
            const LocalElementOperators ops = build_local_operators(s);
            const Eigen::MatrixXd bh = ops.poly_dofs.transpose() * (ops.consistency + ops.stabilization) * ops.poly_dofs;
            const Eigen::MatrixXd exact = vstest::exact_deviatoric_gram(s);
            EXPECT_LE((bh - exact).cwiseAbs().maxCoeff(), 1e-12 * exact.cwiseAbs().maxCoeff()) << "k=" << k;
        }
}

TEST(LocalOperators, SymmetryAndSemidefiniteness)
{
    for (const auto& [mesh, c] : sample_cells()) {
        const LocalElementOperators ops = build_local_operators(mesh, c, params_k(0));
        for (const Eigen::MatrixXd* m : {&ops.divdiv, &ops.consistency, &ops.stabilization}) {
            EXPECT_LE((*m - m->transpose()).cwiseAbs().maxCoeff(), 1e-13 * m->cwiseAbs().maxCoeff() + 1e-300);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(*m);
            EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12 * std::max(1.0, es.eigenvalues().maxCoeff()));
        }
    }
}

TEST(LocalOperators, TraceVectorAndDeviatoricKernel)
{
    const LocalSpace sq(vstest::unit_square_cell(), 0, params_k(0));
    const LocalElementOperators ops = build_local_operators(sq);
    const Eigen::VectorXd id = dofs_of_tensor_field(sq, [](const Point&) { return Tensor::Identity(); });
    EXPECT_NEAR(ops.trace.dot(id), 2.0, 1e-14);
    const Eigen::VectorXd q3 = dofs_of_tensor_field(sq, [](const Point&) { return (3.0 * Tensor::Identity()).eval(); });
    EXPECT_NEAR((ops.consistency * q3).norm(), 0.0, 1e-14);
    EXPECT_NEAR(q3.dot((ops.consistency + ops.stabilization) * q3), 0.0, 1e-13);

    // trace vector against quadrature of tr for RT0 members on general cells
    std::mt19937_64 rng(4);
    for (const auto& [mesh, c] : sample_cells()) {
        const LocalSpace s(mesh, c, params_k(0));
        const vstest::Rt0Tensor tau = vstest::random_rt0(rng, s.centroid());
        const LocalElementOperators o = build_local_operators(s);
        const QuadratureRule q = polygon_quadrature(s.polygon(), s.centroid(), 4);
        const double exact = integrate(q, [&](const Point& x) { return tau(x).trace(); });
        EXPECT_NEAR(o.trace.dot(dofs_of_tensor_field(s, tau)), exact, 1e-12 * std::max(1.0, std::abs(exact)));
    }
}

TEST(LocalOperators, UnisolventOnRt0Members)
{
    for (const auto& [mesh, c] : sample_cells()) {
        const LocalSpace s(mesh, c, params_k(0));
        // rows spanned by (1,0), (0,1), x - xE
        Eigen::MatrixXd d(s.layout().scalar_size(), 3);
        const Point xe = s.centroid();
        d.col(0) = s.dofs_of_vector_field([](const Point&) { return Eigen::Vector2d(1, 0); }, 4);
        d.col(1) = s.dofs_of_vector_field([](const Point&) { return Eigen::Vector2d(0, 1); }, 4);
        d.col(2) = s.dofs_of_vector_field([xe](const Point& x) { return Eigen::Vector2d(x - xe); }, 4);
        EXPECT_EQ(d.colPivHouseholderQr().rank(), 3);
    }
}

TEST(LocalOperators, CommutingDiagramOnEveryFamily)
{
    for (MeshFamily f : vstest::all_families) {
        const PolygonalMesh mesh = generate_mesh(f, 4, DomainTag::UnitSquare, 17);
        for (int k = 0; k <= 1; ++k)
            for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
                const LocalSpace s(mesh, c, params_k(k));
                const Eigen::VectorXd div = div_from_dofs(s, dofs_of_tensor_field(s, vstest::smooth_field, 14));
                const int nk = s.pk().size();
                const Eigen::VectorXd p = vstest::l2_projection_vector(s, vstest::smooth_field_div, 14);
                EXPECT_LE((div.head(nk) - p.head(nk)).cwiseAbs().maxCoeff(), 1e-10) << to_string(f) << " cell " << c;
                EXPECT_LE((div.tail(nk) - p.tail(nk)).cwiseAbs().maxCoeff(), 1e-10) << to_string(f) << " cell " << c;
            }
    }
}

TEST(LocalOperators, StabilizationScaleReport)
{
    // The stabilization spectrum relative to |E| on the slack space; reported,
    // not bounded.
    double lo = 1e300, hi = 0.0;
    for (MeshFamily f : vstest::all_families) {
        const PolygonalMesh mesh = generate_mesh(f, 4, DomainTag::UnitSquare, 2);
        for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
            const LocalElementOperators ops = build_local_operators(mesh, c, params_k(0));
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ops.stabilization / mesh.cell_area(c));
            for (double v : es.eigenvalues())
                if (v > 1e-10) {
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
        }
    }
    RecordProperty("stab_min", std::to_string(lo));
    RecordProperty("stab_max", std::to_string(hi));
    EXPECT_GT(lo, 0.0);
}

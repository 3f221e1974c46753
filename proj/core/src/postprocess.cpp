#include "vemstokes/postprocess.hpp"

#include "vemstokes/error.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace vemstokes {

namespace {

std::string fmt(const char* spec, double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, x);
    return buf;
}

struct LinearFit {
    double v = 0.0;
    double c = 0.0;
    double sse = 0.0;
};

LinearFit fit_at(const std::vector<std::pair<double, double>>& s, double t)
{
    const auto n = static_cast<Eigen::Index>(s.size());
    Eigen::MatrixXd a(n, 2);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        a(i, 0) = 1.0;
        a(i, 1) = std::pow(s[static_cast<std::size_t>(i)].first, t);
        y(i) = s[static_cast<std::size_t>(i)].second;
    }
    const Eigen::Vector2d x = a.colPivHouseholderQr().solve(y);
    return {x(0), x(1), (a * x - y).squaredNorm()};
}

} // namespace

Tensor PkTensorField::value(int cell, const Point& x) const
{
    const auto c = static_cast<std::size_t>(cell);
    return evaluate_tensor(basis[c], projection[c], x);
}

Eigen::Vector2d PkTensorField::div(int cell, const Point& x) const
{
    const auto c = static_cast<std::size_t>(cell);
    const Eigen::VectorXd m = basis[c].evaluate(x);
    const Eigen::Index nk = m.size();
    return {m.dot(divergence[c].head(nk)), m.dot(divergence[c].tail(nk))};
}

PkTensorField build_tensor_field(const PolygonalMesh& mesh, const VemParams& params, const DofMap& map,
                                 const Eigen::VectorXd& dofs)
{
    if (dofs.size() != map.num_global)
        throw ConfigError("DOF vector has " + std::to_string(dofs.size()) + " entries, expected " +
                          std::to_string(map.num_global));
    PkTensorField f;
    f.k = params.k;
    const auto nc = mesh.num_cells();
    f.basis.reserve(nc);
    f.mass.reserve(nc);
    f.projection.reserve(nc);
    f.divergence.reserve(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        const int cell = static_cast<int>(c);
        const LocalSpace space(mesh, cell, params);
        const Eigen::VectorXd local = map.local(cell, dofs);
        f.basis.push_back(space.pk());
        f.mass.push_back(space.scalar_mass());
        f.projection.push_back(build_projector(space) * local);
        f.divergence.push_back(div_from_dofs(space, local));
    }
    return f;
}

Eigen::Vector2d PkVectorField::value(int cell, const Point& x) const
{
    const auto c = static_cast<std::size_t>(cell);
    const Eigen::VectorXd m = basis[c].evaluate(x);
    const Eigen::Index nk = m.size();
    return {m.dot(coeffs[c].head(nk)), m.dot(coeffs[c].tail(nk))};
}

double PkScalarField::value(int cell, const Point& x) const
{
    const auto c = static_cast<std::size_t>(cell);
    return basis[c].evaluate(x).dot(coeffs[c]);
}

PkVectorField recover_velocity(const PkTensorField& sigma, double lambda_hat, double tol)
{
    if (!(lambda_hat > tol))
        throw ConfigError("cannot recover velocity: lambda_hat = " + fmt("%.6g", lambda_hat) +
                          " is not above " + fmt("%.3g", tol));
    PkVectorField u;
    u.basis = sigma.basis;
    u.coeffs.reserve(sigma.num_cells());
    for (const auto& d : sigma.divergence) u.coeffs.push_back(-d / lambda_hat);
    return u;
}

PkScalarField recover_pressure(const PkTensorField& sigma)
{
    PkScalarField p;
    p.basis = sigma.basis;
    p.coeffs.reserve(sigma.num_cells());
    double sq = 0.0;
    for (std::size_t c = 0; c < sigma.num_cells(); ++c) {
        const Eigen::Index nk = sigma.basis[c].size();
        const Eigen::VectorXd& pr = sigma.projection[c];
        const Eigen::VectorXd coeffs = -0.5 * (pr.segment(0, nk) + pr.segment(3 * nk, nk));
        const Eigen::MatrixXd& m = sigma.mass[c];
        p.integral += m.row(0).dot(coeffs);  // m_0 = 1
        sq += coeffs.dot(m * coeffs);
        p.coeffs.push_back(coeffs);
    }
    p.l2_norm = std::sqrt(std::max(sq, 0.0));
    return p;
}

double velocity_l2_squared(const PkVectorField& u, const PkTensorField& sigma)
{
    double s = 0.0;
    for (std::size_t c = 0; c < u.coeffs.size(); ++c) {
        const Eigen::Index nk = sigma.basis[c].size();
        const Eigen::MatrixXd& m = sigma.mass[c];
        const auto ux = u.coeffs[c].head(nk);
        const auto uy = u.coeffs[c].tail(nk);
        s += ux.dot(m * ux) + uy.dot(m * uy);
    }
    return s;
}

ConvergenceFit fit_convergence(const std::vector<std::pair<double, double>>& series)
{
    std::vector<double> hs;
    for (const auto& [h, v] : series) {
        if (!(h > 0.0) || !std::isfinite(h) || !std::isfinite(v))
            throw ConfigError("convergence series needs positive finite h and finite values");
        hs.push_back(h);
    }
    std::sort(hs.begin(), hs.end());
    const auto distinct = std::unique(hs.begin(), hs.end(), [](double a, double b) {
                              return std::abs(a - b) <= 1e-12 * std::max(a, b);
                          }) - hs.begin();
    if (distinct < 3) throw ConfigError("≥ 3 mesh levels required for fitting");

    ConvergenceFit out;
    const double v0 = series.front().second;
    const bool constant = std::all_of(series.begin(), series.end(), [&](const auto& p) {
        return std::abs(p.second - v0) <= 1e-13 * std::max(1.0, std::abs(v0));
    });
    if (constant) {
        out.order = std::numeric_limits<double>::quiet_NaN();
        out.order_defined = false;
        out.extrapolated = v0;
        return out;
    }

    // Coarse scan to bracket the global minimum, then golden-section.
    constexpr double lo = 0.5, hi = 4.0;
    constexpr int steps = 70;
    int best = 0;
    double best_sse = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= steps; ++i) {
        const double sse = fit_at(series, lo + (hi - lo) * i / steps).sse;
        if (sse < best_sse) {
            best_sse = sse;
            best = i;
        }
    }
    double a = lo + (hi - lo) * std::max(best - 1, 0) / steps;
    double b = lo + (hi - lo) * std::min(best + 1, steps) / steps;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = fit_at(series, x1).sse, f2 = fit_at(series, x2).sse;
    while (b - a > 1e-4) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = fit_at(series, x1).sse;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = fit_at(series, x2).sse;
        }
    }
    out.order = 0.5 * (a + b);
    const LinearFit lf = fit_at(series, out.order);
    out.extrapolated = lf.v;
    out.constant = lf.c;
    out.residual = std::sqrt(lf.sse);
    return out;
}

std::vector<CellField> cell_fields(const PolygonalMesh& mesh, const PkVectorField& u, const PkScalarField& p)
{
    const auto nc = mesh.num_cells();
    CellField mag{"velocity_magnitude", 1, {}}, vel{"velocity", 3, {}}, pres{"pressure", 1, {}};
    mag.values.reserve(nc);
    vel.values.reserve(3 * nc);
    pres.values.reserve(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        const int cell = static_cast<int>(c);
        const Point& x = mesh.cell_centroid(cell);
        const Eigen::Vector2d uc = u.value(cell, x);
        mag.values.push_back(uc.norm());
        vel.values.insert(vel.values.end(), {uc.x(), uc.y(), 0.0});
        pres.values.push_back(p.value(cell, x));
    }
    return {mag, vel, pres};
}

std::string format_vtk(const PolygonalMesh& mesh, const std::vector<CellField>& fields)
{
    const auto nc = mesh.num_cells();
    for (const auto& f : fields) {
        if (f.components != 1 && f.components != 3)
            throw ConfigError("field '" + f.name + "': components must be 1 or 3");
        if (f.name.empty() || f.name.find_first_of(" \t\n") != std::string::npos)
            throw ConfigError("field name '" + f.name + "' must be a non-empty token");
        if (f.values.size() != nc * static_cast<std::size_t>(f.components))
            throw ConfigError("field '" + f.name + "' has " + std::to_string(f.values.size()) +
                              " values for " + std::to_string(nc) + " cells");
    }
    std::string out = "# vtk DataFile Version 3.0\nvemstokes\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out += "POINTS " + std::to_string(mesh.num_vertices()) + " double\n";
    for (const Point& v : mesh.vertices()) out += fmt("%.17g", v.x()) + " " + fmt("%.17g", v.y()) + " 0\n";
    std::size_t size = 0;
    for (const auto& cell : mesh.cells()) size += cell.size() + 1;
    out += "CELLS " + std::to_string(nc) + " " + std::to_string(size) + "\n";
    for (const auto& cell : mesh.cells()) {
        out += std::to_string(cell.size());
        for (int v : cell) out += " " + std::to_string(v);
        out += "\n";
    }
    out += "CELL_TYPES " + std::to_string(nc) + "\n";
    for (std::size_t c = 0; c < nc; ++c) out += "7\n";
    if (!fields.empty()) out += "CELL_DATA " + std::to_string(nc) + "\n";
    for (const auto& f : fields) {
        if (f.components == 1) {
            out += "SCALARS " + f.name + " double 1\nLOOKUP_TABLE default\n";
            for (double v : f.values) out += fmt("%.17g", v) + "\n";
        } else {
            out += "VECTORS " + f.name + " double\n";
            for (std::size_t c = 0; c < nc; ++c)
                out += fmt("%.17g", f.values[3 * c]) + " " + fmt("%.17g", f.values[3 * c + 1]) + " " +
                       fmt("%.17g", f.values[3 * c + 2]) + "\n";
        }
    }
    return out;
}

void export_vtk(const PolygonalMesh& mesh, const std::vector<CellField>& fields, const std::string& path)
{
    const std::string text = format_vtk(mesh, fields);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write VTK file '" + path + "'");
    out << text;
    if (!out) throw IoError("write failed for '" + path + "'");
}

Table make_table(const TableInput& input)
{
    if (input.levels.empty() || input.rows < 1) throw ConfigError("table has no results");
    Table t;
    t.reference = input.reference;
    for (const auto& lvl : input.levels) {
        if (static_cast<int>(lvl.values.size()) < input.rows)
            throw ConfigError("mesh level N=" + std::to_string(lvl.n) + " is missing eigenvalues (" +
                              std::to_string(lvl.values.size()) + " of " + std::to_string(input.rows) + ")");
        t.n.push_back(lvl.n);
        t.h.push_back(lvl.h);
    }
    for (int i = 0; i < input.rows; ++i) {
        TableRow row;
        std::vector<std::pair<double, double>> series;
        for (const auto& lvl : input.levels) {
            const double v = lvl.values[static_cast<std::size_t>(i)];
            row.values.push_back(v);
            series.emplace_back(lvl.h, v);
        }
        row.fit = fit_convergence(series);
        t.rows.push_back(std::move(row));
    }

    const bool with_ref = !t.reference.empty();
    auto ref = [&](int i) {
        return i < static_cast<int>(t.reference.size()) ? t.reference[static_cast<std::size_t>(i)]
                                                        : std::numeric_limits<double>::quiet_NaN();
    };

    // CSV: one header line, one line of mesh sizes, then the eigenvalues.
    t.csv = "eigenvalue";
    for (int n : t.n) t.csv += ",N=" + std::to_string(n);
    t.csv += ",order,extrapolated";
    if (with_ref) t.csv += ",reference";
    t.csv += "\r\nh";
    for (double h : t.h) t.csv += "," + fmt("%.12g", h);
    t.csv += ",,";
    if (with_ref) t.csv += ",";
    t.csv += "\r\n";
    for (int i = 0; i < input.rows; ++i) {
        const auto& row = t.rows[static_cast<std::size_t>(i)];
        t.csv += std::to_string(i + 1);
        for (double v : row.values) t.csv += "," + fmt("%.12g", v);
        t.csv += "," + (row.fit.order_defined ? fmt("%.6g", row.fit.order) : std::string()) + "," +
                 fmt("%.12g", row.fit.extrapolated);
        if (with_ref) t.csv += "," + (std::isnan(ref(i)) ? std::string() : fmt("%.12g", ref(i)));
        t.csv += "\r\n";
    }

    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> head{"i"};
    for (int n : t.n) head.push_back("N=" + std::to_string(n));
    head.insert(head.end(), {"Order", "Extr."});
    if (with_ref) head.push_back("Ref.");
    cells.push_back(head);
    std::vector<std::string> hrow{"h"};
    for (double h : t.h) hrow.push_back(fmt("%.6f", h));
    hrow.resize(head.size());
    cells.push_back(hrow);
    for (int i = 0; i < input.rows; ++i) {
        const auto& row = t.rows[static_cast<std::size_t>(i)];
        std::vector<std::string> r{std::to_string(i + 1)};
        for (double v : row.values) r.push_back(fmt("%.4f", v));
        r.push_back(row.fit.order_defined ? fmt("%.2f", row.fit.order) : "-");
        r.push_back(fmt("%.4f", row.fit.extrapolated));
        if (with_ref) r.push_back(std::isnan(ref(i)) ? "-" : fmt("%.4f", ref(i)));
        cells.push_back(r);
    }
    std::vector<std::size_t> width(head.size(), 0);
    for (const auto& r : cells)
        for (std::size_t j = 0; j < r.size(); ++j) width[j] = std::max(width[j], r[j].size());
    if (!input.title.empty()) t.text = input.title + "\n";
    for (const auto& r : cells) {
        std::string line;
        for (std::size_t j = 0; j < r.size(); ++j) {
            if (j) line += "  ";
            line += std::string(width[j] - r[j].size(), ' ') + r[j];
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        t.text += line + "\n";
    }
    return t;
}

} // namespace vemstokes

#pragma once

#include <memory>
#include <span>
#include <vector>

#include "bcm/core_types.hpp"

namespace bcm {

/// u(t_k, x_j) for all k < nt, j < nx, row-major in time.
class WaveField
{
public:
    explicit WaveField(const Grid1D& grid) : grid_(grid), data_(grid.nt() * grid.nx(), 0.0) {}

    const Grid1D& grid() const noexcept { return grid_; }

    double operator()(std::size_t k, std::size_t j) const { return data_[k * grid_.nx() + j]; }
    double& operator()(std::size_t k, std::size_t j) { return data_[k * grid_.nx() + j]; }

    std::span<const double> row(std::size_t k) const { return {data_.data() + k * grid_.nx(), grid_.nx()}; }
    std::span<double> row(std::size_t k) { return {data_.data() + k * grid_.nx(), grid_.nx()}; }

    /// Dirichlet trace of the whole field.
    BoundarySignal trace() const
    {
        auto s = BoundarySignal::zeros(grid_.nt(), grid_.dt());
        for (std::size_t k = 0; k < grid_.nt(); ++k)
        {
            s.left[k] = (*this)(k, 0);
            s.right[k] = (*this)(k, grid_.nx() - 1);
        }
        return s;
    }

private:
    Grid1D grid_;
    std::vector<double> data_;
};

/// Right-hand side s(t,x) = field(t,x) * coefficient(x) of the wave equation, or nothing.
struct SourceTerm
{
    std::shared_ptr<const WaveField> field;
    Potential coefficient;

    static SourceTerm none() { return {}; }
    static SourceTerm rank_one(std::shared_ptr<const WaveField> field, Potential coefficient)
    {
        return {std::move(field), std::move(coefficient)};
    }

    bool empty() const noexcept { return field == nullptr; }

    void check(const Grid1D& grid) const
    {
        if (empty())
            return;
        if (!(field->grid() == grid))
            throw DimensionError("source field lives on a different grid");
        coefficient.check(grid);
    }
};

/// Discrete  d2/dx2 u - q u  with Neumann data imposed through ghost nodes
///   u_{-1} = u_1 + 2 dx f_a,   u_{nx} = u_{nx-2} + 2 dx f_b
/// (outward normal derivative is -d/dx at a and +d/dx at b).
inline void apply_spatial_operator(std::span<const double> u, std::span<const double> q, double fa, double fb,
                                   double dx, std::span<double> out)
{
    const std::size_t n = u.size();
    const double inv_dx2 = 1.0 / (dx * dx);
    out[0] = (2.0 * u[1] + 2.0 * dx * fa - 2.0 * u[0]) * inv_dx2 - q[0] * u[0];
    for (std::size_t j = 1; j + 1 < n; ++j)
        out[j] = (u[j - 1] - 2.0 * u[j] + u[j + 1]) * inv_dx2 - q[j] * u[j];
    out[n - 1] = (2.0 * u[n - 2] + 2.0 * dx * fb - 2.0 * u[n - 1]) * inv_dx2 - q[n - 1] * u[n - 1];
}

/// Explicit second-order leapfrog for  u_tt - u_xx + q u = s,  du/dnu = f,  zero initial data.
///
/// Keeps three rows. After construction the stepper sits at time index 1 with
/// rows 0 and 1 identically zero; each step() consumes the boundary data and
/// source at the current index and advances by one.
class LeapfrogStepper
{
public:
    LeapfrogStepper(const Grid1D& grid, const Potential& q)
        : grid_(grid), q_(q.values().begin(), q.values().end()), prev_(grid.nx(), 0.0), cur_(grid.nx(), 0.0),
          next_(grid.nx(), 0.0)
    {
        q.check(grid);
        if (grid.dt() > grid.dx() * (1.0 + 1e-12))
            throw StabilityError("leapfrog: dt > dx");
    }

    std::size_t index() const noexcept { return k_; }
    std::span<const double> current() const noexcept { return cur_; }
    double trace(Side s) const noexcept { return s == Side::left ? cur_.front() : cur_.back(); }

    /// Advance u^k -> u^{k+1} with Neumann data (fa, fb) = f^k and source row
    /// s^k_j = field[j] * coef[j] (both spans empty for no source).
    void step(double fa, double fb, std::span<const double> src_field = {}, std::span<const double> src_coef = {})
    {
        const std::size_t n = grid_.nx();
        const double dt2 = grid_.dt() * grid_.dt();
        const double dx = grid_.dx();
        const double inv_dx2 = 1.0 / (dx * dx);
        const double* u = cur_.data();
        const double* up = prev_.data();
        const double* q = q_.data();
        double* un = next_.data();

        auto lap0 = (2.0 * u[1] + 2.0 * dx * fa - 2.0 * u[0]) * inv_dx2;
        auto lapn = (2.0 * u[n - 2] + 2.0 * dx * fb - 2.0 * u[n - 1]) * inv_dx2;
        un[0] = 2.0 * u[0] - up[0] + dt2 * (lap0 - q[0] * u[0]);
        for (std::size_t j = 1; j + 1 < n; ++j)
            un[j] = 2.0 * u[j] - up[j] + dt2 * ((u[j - 1] - 2.0 * u[j] + u[j + 1]) * inv_dx2 - q[j] * u[j]);
        un[n - 1] = 2.0 * u[n - 1] - up[n - 1] + dt2 * (lapn - q[n - 1] * u[n - 1]);

        if (!src_field.empty())
        {
            for (std::size_t j = 0; j < n; ++j)
                un[j] += dt2 * src_field[j] * src_coef[j];
        }

        std::swap(prev_, cur_);
        std::swap(cur_, next_);
        ++k_;
    }

private:
    Grid1D grid_;
    std::vector<double> q_;
    std::vector<double> prev_, cur_, next_;
    std::size_t k_ = 1;
};

namespace detail {

inline void check_full_signal(const BoundarySignal& f, const Grid1D& grid)
{
    f.check();
    if (f.size() != grid.nt())
        throw DimensionError("boundary data must have nt = " + std::to_string(grid.nt()) + " samples, got " +
                             std::to_string(f.size()));
    if (std::abs(f.dt - grid.dt()) > 1e-12 * grid.dt())
        throw DimensionError("boundary data time step differs from the grid");
}

} // namespace detail

/// Full space-time solution of  u_tt - u_xx + q u = s,  du/dnu = f on [0,2T].
inline WaveField solve_forward(const Potential& q, const BoundarySignal& f, const SourceTerm& source,
                               const Grid1D& grid)
{
    detail::check_full_signal(f, grid);
    source.check(grid);
    WaveField u(grid);
    LeapfrogStepper stepper(grid, q);
    for (std::size_t k = 1; k + 1 < grid.nt(); ++k)
    {
        if (source.empty())
            stepper.step(f.left[k], f.right[k]);
        else
            stepper.step(f.left[k], f.right[k], source.field->row(k), source.coefficient.values());
        auto row = stepper.current();
        std::copy(row.begin(), row.end(), u.row(k + 1).begin());
    }
    return u;
}

/// Neumann-to-Dirichlet map: u^f restricted to {a,b} x [0,2T].
inline BoundarySignal nd_map(const Potential& q, const BoundarySignal& f, const Grid1D& grid)
{
    detail::check_full_signal(f, grid);
    auto out = BoundarySignal::zeros(grid.nt(), grid.dt());
    LeapfrogStepper stepper(grid, q);
    for (std::size_t k = 1; k + 1 < grid.nt(); ++k)
    {
        stepper.step(f.left[k], f.right[k]);
        out.left[k + 1] = stepper.trace(Side::left);
        out.right[k + 1] = stepper.trace(Side::right);
    }
    return out;
}

/// Spatial state u^f(t_k) of the homogeneous problem.
inline std::vector<double> state_at(const Potential& q, const BoundarySignal& f, const Grid1D& grid, std::size_t k)
{
    detail::check_full_signal(f, grid);
    if (k >= grid.nt())
        throw DimensionError("state_at: time index out of range");
    LeapfrogStepper stepper(grid, q);
    if (k == 0)
        return std::vector<double>(grid.nx(), 0.0);
    while (stepper.index() < k)
        stepper.step(f.left[stepper.index()], f.right[stepper.index()]);
    auto row = stepper.current();
    return {row.begin(), row.end()};
}

/// Linearized ND map: trace of the first-order perturbation udot solving
///   udot_tt - udot_xx + q0 udot = -qdot u0,   d udot/dnu = 0,
/// where u0 solves the background problem with data f. The background and the
/// perturbation are advanced in lockstep so that u0 is never stored in full.
inline BoundarySignal linearized_nd_map(const Potential& q0, const Potential& qdot, const BoundarySignal& f,
                                        const Grid1D& grid)
{
    detail::check_full_signal(f, grid);
    qdot.check(grid);
    auto out = BoundarySignal::zeros(grid.nt(), grid.dt());
    if (qdot.is_zero())
        return out;
    const Potential coef = qdot.scaled(-1.0);
    LeapfrogStepper background(grid, q0);
    LeapfrogStepper perturbation(grid, q0);
    for (std::size_t k = 1; k + 1 < grid.nt(); ++k)
    {
        perturbation.step(0.0, 0.0, background.current(), coef.values());
        background.step(f.left[k], f.right[k]);
        out.left[k + 1] = perturbation.trace(Side::left);
        out.right[k + 1] = perturbation.trace(Side::right);
    }
    return out;
}

/// Same map computed from a stored background field (rank-one source).
inline BoundarySignal linearized_nd_map_from_field(const Potential& q0, std::shared_ptr<const WaveField> background,
                                                   const Potential& qdot)
{
    const Grid1D& grid = background->grid();
    auto zero = BoundarySignal::zeros(grid.nt(), grid.dt());
    auto u = solve_forward(q0, zero, SourceTerm::rank_one(background, qdot.scaled(-1.0)), grid);
    return u.trace();
}

} // namespace bcm

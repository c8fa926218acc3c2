#pragma once

#include "tamed/sde_model.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace tamed {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// A pure function of (counter, key); no internal state.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter apply(Counter ctr, Key key) noexcept;
};

/// Brownian increments W((n+1)T/N) - W(nT/N), n = 0..N-1, each in R^m.
/// Stored row-major: component j of increment n is at data[n * m + j].
struct IncrementGrid {
    std::size_t steps = 0;
    int dim_noise = 1;
    double horizon = 1.0;
    std::uint64_t seed = 0;
    std::uint64_t path_id = 0;
    std::vector<double> data;

    double dt() const noexcept { return horizon / static_cast<double>(steps); }

    std::span<const double> increment(std::size_t n) const {
        return {data.data() + n * static_cast<std::size_t>(dim_noise),
                static_cast<std::size_t>(dim_noise)};
    }

    Eigen::Map<const Vector> increment_vector(std::size_t n) const {
        return Eigen::Map<const Vector>(data.data() + n * static_cast<std::size_t>(dim_noise),
                                        dim_noise);
    }

    /// W at grid time n T / N (prefix sum in ascending order), n = 0..N.
    Vector brownian_at(std::size_t n) const;
};

/// Standard normal from the (seed, path_id, step, component) key.
///
/// Counter layout: (component / 2, step, path_id low, path_id high); key =
/// seed. Each Philox block yields two 53-bit uniforms u in (0, 1), mapped to
/// N(0,1) by the inverse normal CDF, -sqrt(2) * erfc_inv(2u).
double keyed_normal(std::uint64_t seed, std::uint64_t path_id, std::uint32_t step,
                    std::uint32_t component);

/// i.i.d. N(0, (T/N) I_m) increments keyed on (seed, path_id, step, component).
IncrementGrid sample_grid(std::size_t steps, int dim_noise, double horizon, std::uint64_t seed,
                          std::uint64_t path_id);

/// Grid from explicit increment values (row-major, steps * m entries).
IncrementGrid make_grid(std::size_t steps, int dim_noise, double horizon,
                        std::vector<double> increments, std::uint64_t seed = 0,
                        std::uint64_t path_id = 0);

/// Block sums of `factor` consecutive increments. Power-of-two factors are
/// summed pairwise (repeated halving), so chains of coarsenings agree bitwise
/// with a single one; other factors are summed in ascending index order.
IncrementGrid coarsen(const IncrementGrid& grid, std::size_t factor);

/// Binary dump: five little-endian 8-byte header words (steps u64, m u64, T f64,
/// seed u64, path_id u64) followed by steps * m little-endian f64 increments.
void write_grid(std::ostream& out, const IncrementGrid& grid);
IncrementGrid read_grid(std::istream& in);

}  // namespace tamed

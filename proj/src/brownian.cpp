#include "tamed/brownian.hpp"

#include "tamed/errors.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <bit>
#include <numbers>
#include <cmath>
#include <istream>
#include <ostream>

namespace tamed {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

// 53 random bits -> open interval (0, 1)
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

using NoPromotion = boost::math::policies::policy<boost::math::policies::promote_double<false>>;

inline double inverse_normal_cdf(double u) {
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u, NoPromotion());
}

Philox4x32::Counter philox_block(std::uint64_t seed, std::uint64_t path_id, std::uint32_t step,
                                 std::uint32_t block) {
    const Philox4x32::Counter ctr = {block, step, static_cast<std::uint32_t>(path_id),
                                     static_cast<std::uint32_t>(path_id >> 32)};
    const Philox4x32::Key key = {static_cast<std::uint32_t>(seed),
                                 static_cast<std::uint32_t>(seed >> 32)};
    return Philox4x32::apply(ctr, key);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
    out.write(bytes, 8);
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char bytes[8];
    in.read(reinterpret_cast<char*>(bytes), 8);
    if (!in) throw ArgumentError("truncated increment grid stream");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return v;
}

}  // namespace

Philox4x32::Counter Philox4x32::apply(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kPhiloxW0;
            key[1] += kPhiloxW1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

double keyed_normal(std::uint64_t seed, std::uint64_t path_id, std::uint32_t step,
                    std::uint32_t component) {
    const auto block = philox_block(seed, path_id, step, component / 2);
    const bool second = (component % 2) != 0;
    return inverse_normal_cdf(second ? to_open_unit(block[2], block[3])
                                     : to_open_unit(block[0], block[1]));
}

Vector IncrementGrid::brownian_at(std::size_t n) const {
    if (n > steps) throw ArgumentError("brownian_at: index beyond grid");
    Vector w = Vector::Zero(dim_noise);
    for (std::size_t k = 0; k < n; ++k) w += increment_vector(k);
    return w;
}

IncrementGrid sample_grid(std::size_t steps, int dim_noise, double horizon, std::uint64_t seed,
                          std::uint64_t path_id) {
    if (steps < 1) throw ArgumentError("sample_grid: steps must be >= 1");
    if (dim_noise < 1) throw ArgumentError("sample_grid: dim_noise must be >= 1");
    if (!(horizon > 0.0)) throw ArgumentError("sample_grid: horizon must be positive");
    if (steps > 0xFFFFFFFFull) throw ArgumentError("sample_grid: at most 2^32 - 1 steps");

    IncrementGrid grid;
    grid.steps = steps;
    grid.dim_noise = dim_noise;
    grid.horizon = horizon;
    grid.seed = seed;
    grid.path_id = path_id;
    const auto m = static_cast<std::size_t>(dim_noise);
    grid.data.resize(steps * m);

    const double scale = std::sqrt(horizon / static_cast<double>(steps));
    for (std::size_t n = 0; n < steps; ++n) {
        double* row = grid.data.data() + n * m;
        for (std::size_t j = 0; j < m; j += 2) {
            const auto block = philox_block(seed, path_id, static_cast<std::uint32_t>(n),
                                            static_cast<std::uint32_t>(j / 2));
            row[j] = scale * inverse_normal_cdf(to_open_unit(block[0], block[1]));
            if (j + 1 < m) row[j + 1] = scale * inverse_normal_cdf(to_open_unit(block[2], block[3]));
        }
    }
    return grid;
}

IncrementGrid make_grid(std::size_t steps, int dim_noise, double horizon,
                        std::vector<double> increments, std::uint64_t seed,
                        std::uint64_t path_id) {
    if (steps < 1 || dim_noise < 1) throw ArgumentError("make_grid: empty grid");
    if (!(horizon > 0.0)) throw ArgumentError("make_grid: horizon must be positive");
    if (increments.size() != steps * static_cast<std::size_t>(dim_noise))
        throw ArgumentError("make_grid: expected steps * dim_noise increments");
    IncrementGrid grid;
    grid.steps = steps;
    grid.dim_noise = dim_noise;
    grid.horizon = horizon;
    grid.seed = seed;
    grid.path_id = path_id;
    grid.data = std::move(increments);
    return grid;
}

namespace {

// Sums of `factor` consecutive increments in ascending index order.
IncrementGrid block_sums(const IncrementGrid& grid, std::size_t factor) {
    IncrementGrid out;
    out.steps = grid.steps / factor;
    out.dim_noise = grid.dim_noise;
    out.horizon = grid.horizon;
    out.seed = grid.seed;
    out.path_id = grid.path_id;
    const auto m = static_cast<std::size_t>(grid.dim_noise);
    out.data.assign(out.steps * m, 0.0);
    for (std::size_t k = 0; k < out.steps; ++k) {
        double* dst = out.data.data() + k * m;
        for (std::size_t i = k * factor; i < (k + 1) * factor; ++i) {
            const double* src = grid.data.data() + i * m;
            for (std::size_t j = 0; j < m; ++j) dst[j] += src[j];
        }
    }
    return out;
}

}  // namespace

IncrementGrid coarsen(const IncrementGrid& grid, std::size_t factor) {
    if (factor < 1 || grid.steps % factor != 0)
        throw ArgumentError("coarsen: factor " + std::to_string(factor) +
                            " does not divide " + std::to_string(grid.steps) + " steps");
    if (factor == 1) return grid;
    if (!std::has_single_bit(factor)) return block_sums(grid, factor);

    // Pairwise halving, so that coarsening by 2^a then 2^b is bitwise
    // identical to coarsening by 2^(a+b).
    IncrementGrid out = block_sums(grid, 2);
    for (std::size_t done = 2; done < factor; done *= 2) out = block_sums(out, 2);
    return out;
}

void write_grid(std::ostream& out, const IncrementGrid& grid) {
    put_u64(out, grid.steps);
    put_u64(out, static_cast<std::uint64_t>(grid.dim_noise));
    put_u64(out, std::bit_cast<std::uint64_t>(grid.horizon));
    put_u64(out, grid.seed);
    put_u64(out, grid.path_id);
    for (double v : grid.data) put_u64(out, std::bit_cast<std::uint64_t>(v));
}

IncrementGrid read_grid(std::istream& in) {
    IncrementGrid grid;
    grid.steps = get_u64(in);
    grid.dim_noise = static_cast<int>(get_u64(in));
    grid.horizon = std::bit_cast<double>(get_u64(in));
    grid.seed = get_u64(in);
    grid.path_id = get_u64(in);
    if (grid.steps < 1 || grid.dim_noise < 1 || !(grid.horizon > 0.0))
        throw ArgumentError("read_grid: invalid header");
    grid.data.resize(grid.steps * static_cast<std::size_t>(grid.dim_noise));
    for (double& v : grid.data) v = std::bit_cast<double>(get_u64(in));
    return grid;
}

}  // namespace tamed

#include "feedtune/rng.hpp"

#include <cmath>

namespace feedtune {

namespace {

constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

std::uint64_t SeededRng::next_u64() {
    state_ += kGamma;
    return mix64(state_);
}

double SeededRng::next_double() {
    // 53 high bits -> [0, 1)
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t SeededRng::next_below(std::uint64_t n) {
    // Rejection-free multiply-shift; bias is negligible for n << 2^64 and
    // keeps the stream consumption fixed at one draw.
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

double SeededRng::next_gaussian() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * next_double() - 1.0;
        v = 2.0 * next_double() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
}

SeededRng SeededRng::child(std::uint64_t stream_id) const {
    return SeededRng(mix64(state_ ^ mix64(stream_id + kGamma)));
}

SeededRng SeededRng::split() {
    return SeededRng(mix64(next_u64()));
}

void fill_gaussian(SeededRng& rng, std::vector<double>& out) {
    for (double& x : out) x = rng.next_gaussian();
}

} // namespace feedtune

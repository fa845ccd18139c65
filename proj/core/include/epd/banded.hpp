#pragma once

#include <span>
#include <vector>

namespace epd {

/// LU factorisation with partial pivoting of a square band matrix with `kl`
/// sub-diagonals and `ku` super-diagonals. Row interchanges widen the upper
/// band to ku + kl, so storage is reserved for that up front.
class BandedLU {
public:
    BandedLU(int n, int kl, int ku);

    int size() const noexcept { return n_; }
    int lower() const noexcept { return kl_; }
    int upper() const noexcept { return ku_; }

    /// Set entry (i, j) before factorisation; |i - j| must lie within the band.
    void set(int i, int j, double value);
    double get(int i, int j) const;

    /// Factorise in place. Returns the smallest |pivot| encountered.
    double factorize();

    /// Solve in place; requires factorize() and a nonzero pivot set.
    void solve(std::span<double> b) const;

private:
    double& at(int i, int j) { return band_[static_cast<std::size_t>(i) * width_ + (j - i + kl_)]; }
    double at(int i, int j) const { return band_[static_cast<std::size_t>(i) * width_ + (j - i + kl_)]; }

    int n_;
    int kl_;
    int ku_;
    std::size_t width_;
    std::vector<double> band_;
    std::vector<double> mult_;
    std::vector<int> pivot_;
    bool factored_ = false;
};

}  // namespace epd

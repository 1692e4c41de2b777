#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fehmm/error.hpp"

namespace fehmm::fem {

/// Square band matrix with row-major band storage: row i keeps columns
/// [i - lower, i + upper], entry (i, j) at data[i * width + (j - i + lower)].
class BandedMatrix {
public:
    BandedMatrix() = default;
    BandedMatrix(std::size_t n, std::size_t lower, std::size_t upper)
        : n_(n), lower_(lower), upper_(upper), data_(n * (lower + upper + 1), 0.0) {}

    static BandedMatrix identity(std::size_t n) {
        BandedMatrix m(n, 0, 0);
        for (std::size_t i = 0; i < n; ++i) m.data_[i] = 1.0;
        return m;
    }

    std::size_t size() const noexcept { return n_; }
    std::size_t lower() const noexcept { return lower_; }
    std::size_t upper() const noexcept { return upper_; }

    bool in_band(std::size_t i, std::size_t j) const noexcept {
        return i < n_ && j < n_ && j + lower_ >= i && j <= i + upper_;
    }

    double at(std::size_t i, std::size_t j) const noexcept { return in_band(i, j) ? data_[index(i, j)] : 0.0; }

    void add(std::size_t i, std::size_t j, double v) {
        if (!in_band(i, j))
            throw InputError("BandedMatrix: entry (" + std::to_string(i) + ", " + std::to_string(j) + ") outside band");
        data_[index(i, j)] += v;
    }

    void set(std::size_t i, std::size_t j, double v) {
        if (!in_band(i, j))
            throw InputError("BandedMatrix: entry (" + std::to_string(i) + ", " + std::to_string(j) + ") outside band");
        data_[index(i, j)] = v;
    }

    /// this += alpha * other (same band layout).
    void axpy(double alpha, const BandedMatrix& other) {
        if (other.n_ != n_ || other.lower_ != lower_ || other.upper_ != upper_)
            throw InputError("BandedMatrix::axpy: layout mismatch");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += alpha * other.data_[k];
    }

    void scale(double alpha) {
        for (double& v : data_) v *= alpha;
    }

    std::vector<double> multiply(std::span<const double> x) const {
        if (x.size() != n_) throw InputError("BandedMatrix::multiply: size mismatch");
        std::vector<double> y(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t j0 = i >= lower_ ? i - lower_ : 0;
            const std::size_t j1 = std::min(n_ - 1, i + upper_);
            double acc = 0.0;
            for (std::size_t j = j0; j <= j1; ++j) acc += data_[index(i, j)] * x[j];
            y[i] = acc;
        }
        return y;
    }

    double norm_inf() const {
        double best = 0.0;
        for (std::size_t i = 0; i < n_; ++i) best = std::max(best, row_abs_sum(i));
        return best;
    }

    double row_abs_sum(std::size_t i) const {
        double s = 0.0;
        const std::size_t width = lower_ + upper_ + 1;
        for (std::size_t k = 0; k < width; ++k) s += std::fabs(data_[i * width + k]);
        return s;
    }

    double row_abs_max(std::size_t i) const {
        double s = 0.0;
        const std::size_t width = lower_ + upper_ + 1;
        for (std::size_t k = 0; k < width; ++k) s = std::max(s, std::fabs(data_[i * width + k]));
        return s;
    }

    friend class BandedLU;

private:
    std::size_t index(std::size_t i, std::size_t j) const noexcept { return i * (lower_ + upper_ + 1) + (j + lower_ - i); }

    std::size_t n_ = 0;
    std::size_t lower_ = 0;
    std::size_t upper_ = 0;
    std::vector<double> data_;
};

/// LU factorization without pivoting, stored in place of a copy of the matrix.
/// A pivot smaller than 1e-14 times the largest entry of its original row is
/// treated as singular.
class BandedLU {
public:
    explicit BandedLU(BandedMatrix m) : lu_(std::move(m)) {
        const std::size_t n = lu_.n_, kl = lu_.lower_, ku = lu_.upper_;
        std::vector<double> row_scale(n);
        for (std::size_t i = 0; i < n; ++i) row_scale[i] = lu_.row_abs_max(i);
        for (std::size_t k = 0; k < n; ++k) {
            const double pivot = lu_.data_[lu_.index(k, k)];
            if (!(std::fabs(pivot) > 1e-14 * row_scale[k]) || row_scale[k] == 0.0)
                throw SingularMatrixError("banded LU: zero pivot at row " + std::to_string(k));
            const std::size_t i_end = std::min(n - 1, k + kl);
            const std::size_t j_end = std::min(n - 1, k + ku);
            for (std::size_t i = k + 1; i <= i_end; ++i) {
                double& lik = lu_.data_[lu_.index(i, k)];
                lik /= pivot;
                if (lik == 0.0) continue;
                for (std::size_t j = k + 1; j <= j_end; ++j) lu_.data_[lu_.index(i, j)] -= lik * lu_.data_[lu_.index(k, j)];
            }
        }
    }

    std::size_t size() const noexcept { return lu_.n_; }

    std::vector<double> solve(std::span<const double> rhs) const {
        std::vector<double> x(rhs.begin(), rhs.end());
        solve_in_place(x);
        return x;
    }

    void solve_in_place(std::span<double> x) const {
        const std::size_t n = lu_.n_, kl = lu_.lower_, ku = lu_.upper_;
        if (x.size() != n) throw InputError("BandedLU::solve: size mismatch");
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j0 = i >= kl ? i - kl : 0;
            double acc = x[i];
            for (std::size_t j = j0; j < i; ++j) acc -= lu_.data_[lu_.index(i, j)] * x[j];
            x[i] = acc;
        }
        for (std::size_t ii = n; ii-- > 0;) {
            const std::size_t j1 = std::min(n - 1, ii + ku);
            double acc = x[ii];
            for (std::size_t j = ii + 1; j <= j1; ++j) acc -= lu_.data_[lu_.index(ii, j)] * x[j];
            x[ii] = acc / lu_.data_[lu_.index(ii, ii)];
        }
    }

private:
    BandedMatrix lu_;
};

inline std::vector<double> solve_banded(const BandedMatrix& m, std::span<const double> rhs) {
    return BandedLU(m).solve(rhs);
}

/// Matrix on a periodic dof set where only dof 0 couples around the wrap.
/// Stored as dof 0's row and column plus a band matrix over dofs 1..n-1,
/// and solved through the Schur complement on dof 0.
class PeriodicBandedMatrix {
public:
    PeriodicBandedMatrix(std::size_t n, std::size_t bandwidth)
        : n_(n), interior_(n - 1, bandwidth, bandwidth), row0_(n - 1, 0.0), col0_(n - 1, 0.0) {
        if (n < 3) throw InputError("PeriodicBandedMatrix: need at least 3 dofs");
    }

    std::size_t size() const noexcept { return n_; }

    void add(std::size_t i, std::size_t j, double v) {
        if (i == 0 && j == 0) corner_ += v;
        else if (i == 0) row0_[j - 1] += v;
        else if (j == 0) col0_[i - 1] += v;
        else interior_.add(i - 1, j - 1, v);
    }

    double at(std::size_t i, std::size_t j) const {
        if (i == 0 && j == 0) return corner_;
        if (i == 0) return row0_[j - 1];
        if (j == 0) return col0_[i - 1];
        return interior_.at(i - 1, j - 1);
    }

    std::vector<double> multiply(std::span<const double> x) const {
        std::vector<double> rest(x.begin() + 1, x.end());
        auto y_rest = interior_.multiply(rest);
        std::vector<double> y(n_);
        y[0] = corner_ * x[0];
        for (std::size_t k = 0; k + 1 < n_; ++k) {
            y[0] += row0_[k] * x[k + 1];
            y[k + 1] = y_rest[k] + col0_[k] * x[0];
        }
        return y;
    }

    const BandedMatrix& interior() const noexcept { return interior_; }
    double corner() const noexcept { return corner_; }
    const std::vector<double>& row0() const noexcept { return row0_; }
    const std::vector<double>& col0() const noexcept { return col0_; }

private:
    std::size_t n_;
    BandedMatrix interior_;
    std::vector<double> row0_;
    std::vector<double> col0_;
    double corner_ = 0.0;
};

class PeriodicLU {
public:
    explicit PeriodicLU(const PeriodicBandedMatrix& m)
        : lu_(m.interior()), row0_(m.row0()), z_(lu_.solve(m.col0())) {
        double dot = 0.0;
        for (std::size_t k = 0; k < z_.size(); ++k) dot += row0_[k] * z_[k];
        schur_ = m.corner() - dot;
        if (!(std::fabs(schur_) > 1e-14 * std::fabs(m.corner())))
            throw SingularMatrixError("periodic LU: singular Schur complement");
    }

    std::vector<double> solve(std::span<const double> rhs) const {
        std::vector<double> x(rhs.size());
        std::vector<double> w(rhs.begin() + 1, rhs.end());
        lu_.solve_in_place(w);
        double dot = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) dot += row0_[k] * w[k];
        x[0] = (rhs[0] - dot) / schur_;
        for (std::size_t k = 0; k < w.size(); ++k) x[k + 1] = w[k] - z_[k] * x[0];
        return x;
    }

private:
    BandedLU lu_;
    std::vector<double> row0_;
    std::vector<double> z_;
    double schur_ = 0.0;
};

/// Solves with dof 0 pinned to zero, dropping its equation. Used for the
/// singular periodic stiffness system whose kernel is the constants.
inline std::vector<double> solve_pinned(const PeriodicBandedMatrix& m, std::span<const double> rhs) {
    std::vector<double> x(rhs.size(), 0.0);
    std::vector<double> w(rhs.begin() + 1, rhs.end());
    BandedLU(m.interior()).solve_in_place(w);
    std::copy(w.begin(), w.end(), x.begin() + 1);
    return x;
}

}  // namespace fehmm::fem

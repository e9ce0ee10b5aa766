#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>

namespace esb {

/// Dense symmetric matrix. Writes go through `set`, which mirrors the
/// entry, so the stored matrix is exactly symmetric at all times.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(int order) : m_(Eigen::MatrixXd::Zero(order, order)) {}

    /// Symmetrizes `m` as (m + m^T) / 2.
    static SymMatrix from_dense(const Eigen::MatrixXd& m) {
        if (m.rows() != m.cols()) {
            throw std::invalid_argument("SymMatrix: matrix is not square");
        }
        SymMatrix s;
        s.m_ = 0.5 * (m + m.transpose());
        return s;
    }

    static SymMatrix identity(int order) {
        SymMatrix s(order);
        s.m_.setIdentity();
        return s;
    }

    int order() const { return static_cast<int>(m_.rows()); }

    double operator()(int i, int j) const { return m_(i, j); }

    void set(int i, int j, double v) {
        m_(i, j) = v;
        m_(j, i) = v;
    }

    void add(int i, int j, double v) {
        m_(i, j) += v;
        if (i != j) m_(j, i) += v;
    }

    const Eigen::MatrixXd& dense() const { return m_; }

    /// Trace inner product <A, B>.
    double dot(const SymMatrix& other) const { return m_.cwiseProduct(other.m_).sum(); }

    bool operator==(const SymMatrix& other) const { return m_ == other.m_; }

private:
    Eigen::MatrixXd m_;
};

}  // namespace esb

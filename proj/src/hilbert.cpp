#include "giv/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include <Eigen/Eigenvalues>

namespace giv {

namespace {

constexpr double kProbSlack = 1e-12;
constexpr double kClusterWidth = 1e-8;

}  // namespace

double max_abs(const Mat& m) {
    if (m.size() == 0) return 0.0;
    return m.cwiseAbs().maxCoeff();
}

bool all_finite(const Mat& m) {
    return m.allFinite();
}

bool all_finite(const Vec& v) {
    return v.allFinite();
}

StateVector::StateVector(std::string space, Vec coords)
    : space_(std::move(space)), coords_(std::move(coords)) {
    if (coords_.size() == 0) {
        throw DimensionMismatch("state vector must have at least one component");
    }
    if (!all_finite(coords_)) {
        throw NotFinite("state vector has non-finite components");
    }
    normalized_ = std::abs(coords_.norm() - 1.0) <= kDefaultTol;
}

StateVector StateVector::axis(std::string space, Eigen::Index dim, Eigen::Index i) {
    if (dim <= 0) {
        throw DimensionMismatch("axis dimension must be positive");
    }
    if (i < 0 || i >= dim) {
        throw IndexOutOfRange("axis index out of range");
    }
    Vec v = Vec::Zero(dim);
    v(i) = Complex(1.0, 0.0);
    return StateVector(std::move(space), std::move(v));
}

StateVector StateVector::normalized(std::string space, Vec coords) {
    if (!all_finite(coords)) {
        throw NotFinite("state vector has non-finite components");
    }
    double n = coords.norm();
    if (n < 1e-300) {
        throw NotNormalized("cannot normalize a zero vector");
    }
    return StateVector(std::move(space), coords / n);
}

Complex inner_product(const StateVector& u, const StateVector& v) {
    if (u.space() != v.space()) {
        throw SpaceMismatch("inner product across spaces " + u.space() +
                            " and " + v.space());
    }
    if (u.dim() != v.dim()) {
        throw DimensionMismatch("inner product of vectors with dimensions " +
                                std::to_string(u.dim()) + " and " +
                                std::to_string(v.dim()));
    }
    return u.coords().dot(v.coords());
}

double born_probability(const StateVector& axis, const StateVector& psi) {
    if (!axis.is_normalized()) {
        throw NotNormalized("outcome axis is not normalized");
    }
    if (!psi.is_normalized()) {
        throw NotNormalized("state is not normalized");
    }
    double p = std::norm(inner_product(axis, psi));
    if (p < -kProbSlack || p > 1.0 + kProbSlack) {
        throw ProbabilityOutOfRange("probability " + std::to_string(p) +
                                    " outside [0, 1]");
    }
    return std::clamp(p, 0.0, 1.0);
}

Mat commutator(const Mat& a, const Mat& b) {
    if (a.rows() != a.cols() || b.rows() != b.cols()) {
        throw DimensionMismatch("commutator requires square matrices");
    }
    if (a.rows() != b.rows()) {
        throw DimensionMismatch("commutator of matrices with dimensions " +
                                std::to_string(a.rows()) + " and " +
                                std::to_string(b.rows()));
    }
    return a * b - b * a;
}

UnitaryCheck is_unitary(const Mat& m, double tol) {
    if (m.rows() != m.cols()) {
        return {false, std::numeric_limits<double>::infinity()};
    }
    if (!all_finite(m)) {
        throw NotFinite("matrix has non-finite entries");
    }
    Mat g = m.adjoint() * m;
    g.diagonal().array() -= 1.0;
    double defect = max_abs(g);
    return {defect <= tol, defect};
}

namespace {

/// Phase in (-pi, pi], with the branch cut value -pi mapped to +pi so that
/// eigenvalue -1 has one canonical phase.
double canonical_phase(Complex z) {
    double p = std::arg(z);
    if (p <= -std::numbers::pi) p = std::numbers::pi;
    return p;
}

}  // namespace

Eigenphases diagonalize_unitary(const Mat& u, double tol) {
    auto check = is_unitary(u, tol);
    if (!check.unitary) {
        throw NotUnitaryInput("matrix fails unitarity check, defect = " +
                              std::to_string(check.defect));
    }
    const Eigen::Index n = u.rows();

    // Schur of a unitary matrix: T is diagonal up to roundoff and the Schur
    // basis is orthonormal, which an eigen-solver would not guarantee for
    // degenerate eigenvalues.
    Eigen::ComplexSchur<Mat> schur(u);
    if (schur.info() != Eigen::Success) {
        throw Error("Schur decomposition failed");
    }
    Mat basis = schur.matrixU();
    Vec diag = schur.matrixT().diagonal();

    std::vector<Eigen::Index> order(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
    std::vector<double> phase(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        phase[static_cast<size_t>(i)] = canonical_phase(diag(i));
    }
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        double pa = phase[static_cast<size_t>(a)];
        double pb = phase[static_cast<size_t>(b)];
        if (pa != pb) return pa < pb;
        return a < b;
    });

    Mat v(n, n);
    std::vector<double> sorted_phases(static_cast<size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) {
        v.col(k) = basis.col(order[static_cast<size_t>(k)]);
        sorted_phases[static_cast<size_t>(k)] = phase[static_cast<size_t>(order[static_cast<size_t>(k)])];
    }

    auto argmax_row = [](const Vec& col) {
        Eigen::Index best = 0;
        double mag = -1.0;
        for (Eigen::Index r = 0; r < col.size(); ++r) {
            double a = std::abs(col(r));
            if (a > mag + 1e-12) {
                mag = a;
                best = r;
            }
        }
        return best;
    };

    // Degenerate clusters: re-orthonormalize and fix an ordering and phase
    // convention so equal inputs produce bitwise-equal outputs.
    Eigen::Index start = 0;
    while (start < n) {
        Eigen::Index stop = start + 1;
        while (stop < n &&
               sorted_phases[static_cast<size_t>(stop)] -
                       sorted_phases[static_cast<size_t>(stop - 1)] <=
                   kClusterWidth) {
            ++stop;
        }
        Eigen::Index width = stop - start;
        if (width > 1) {
            Eigen::HouseholderQR<Mat> qr(v.block(0, start, n, width));
            Mat q = qr.householderQ() * Mat::Identity(n, width);
            std::vector<Eigen::Index> cols(static_cast<size_t>(width));
            for (Eigen::Index c = 0; c < width; ++c) cols[static_cast<size_t>(c)] = c;
            std::vector<Eigen::Index> anchors(static_cast<size_t>(width));
            for (Eigen::Index c = 0; c < width; ++c) {
                anchors[static_cast<size_t>(c)] = argmax_row(q.col(c));
            }
            std::sort(cols.begin(), cols.end(), [&](Eigen::Index a, Eigen::Index b) {
                Eigen::Index ra = anchors[static_cast<size_t>(a)];
                Eigen::Index rb = anchors[static_cast<size_t>(b)];
                if (ra != rb) return ra < rb;
                return a < b;
            });
            Mat reordered(n, width);
            for (Eigen::Index c = 0; c < width; ++c) {
                reordered.col(c) = q.col(cols[static_cast<size_t>(c)]);
            }
            v.block(0, start, n, width) = reordered;
        }
        start = stop;
    }

    for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::Index r = argmax_row(v.col(k));
        Complex pivot = v(r, k);
        double mag = std::abs(pivot);
        if (mag > 0.0) {
            v.col(k) *= std::conj(pivot) / mag;
        }
    }

    Eigenphases out;
    out.phases = std::move(sorted_phases);
    out.transform = v.adjoint();

    // Internal consistency: the similarity must actually diagonalize U.
    Mat d = out.transform * u * out.transform.adjoint();
    double off = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i != j) off = std::max(off, std::abs(d(i, j)));
        }
    }
    if (off > std::max(tol, 1e2 * kClusterWidth)) {
        throw Error("diagonalization residual " + std::to_string(off) +
                    " exceeds tolerance");
    }
    return out;
}

OrthonormalCheck is_orthonormal_set(const std::vector<StateVector>& vectors,
                                    double tol) {
    if (vectors.empty()) {
        return {true, 0.0};
    }
    const auto& space = vectors.front().space();
    const Eigen::Index dim = vectors.front().dim();
    for (const auto& v : vectors) {
        if (v.space() != space) {
            throw SpaceMismatch("orthonormality check across spaces " + space +
                                " and " + v.space());
        }
        if (v.dim() != dim) {
            throw DimensionMismatch("orthonormality check with mixed dimensions");
        }
    }
    double defect = 0.0;
    for (size_t i = 0; i < vectors.size(); ++i) {
        for (size_t j = 0; j < vectors.size(); ++j) {
            Complex g = inner_product(vectors[i], vectors[j]);
            double target = (i == j) ? 1.0 : 0.0;
            defect = std::max(defect, std::abs(g - Complex(target, 0.0)));
        }
    }
    return {defect <= tol, defect};
}

}  // namespace giv

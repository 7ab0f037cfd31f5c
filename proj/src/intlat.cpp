#include "spectral_forge/intlat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "spectral_forge/error.hpp"

namespace spectral_forge {

namespace {

constexpr double kExpansiveMargin = 1e-9;

Eigen::MatrixXd to_eigen(const IntMatrix& m) {
    Eigen::MatrixXd out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = static_cast<double>(m(i, j));
    return out;
}

double op_norm(const Eigen::MatrixXd& a) {
    if (a.rows() == 1) return std::abs(a(0, 0));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    return svd.singularValues()(0);
}

// Fraction-free (Bareiss) determinant of a square matrix of big integers.
BigInt bareiss_det(std::vector<BigInt> a, std::size_t n) {
    if (n == 0) return 1;
    BigInt sign = 1;
    BigInt prev = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (a[k * n + k] == 0) {
            std::size_t p = k + 1;
            while (p < n && a[p * n + k] == 0) ++p;
            if (p == n) return 0;
            for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[p * n + j]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j < n; ++j)
                a[i * n + j] = (a[i * n + j] * a[k * n + k] - a[i * n + k] * a[k * n + j]) / prev;
        }
        prev = a[k * n + k];
    }
    return sign * a[(n - 1) * n + (n - 1)];
}

}  // namespace

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t out;
    if (__builtin_add_overflow(a, b, &out)) fail(ErrorKind::Overflow, "64-bit integer addition overflow");
    return out;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t out;
    if (__builtin_mul_overflow(a, b, &out)) fail(ErrorKind::Overflow, "64-bit integer multiplication overflow");
    return out;
}

IntMatrix::IntMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols, 0) {}

IntMatrix IntMatrix::from_rows(const std::vector<IntVec>& rows) {
    if (rows.empty()) fail(ErrorKind::Shape, "matrix has no rows");
    IntMatrix m(rows.size(), rows.front().size());
    if (m.cols_ == 0) fail(ErrorKind::Shape, "matrix has no columns");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != m.cols_) fail(ErrorKind::Shape, "ragged matrix rows");
        for (std::size_t j = 0; j < m.cols_; ++j) m(i, j) = rows[i][j];
    }
    return m;
}

IntMatrix IntMatrix::identity(std::size_t d) {
    IntMatrix m(d, d);
    for (std::size_t i = 0; i < d; ++i) m(i, i) = 1;
    return m;
}

IntMatrix IntMatrix::transpose() const {
    IntMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

IntMatrix IntMatrix::operator*(const IntMatrix& other) const {
    if (cols_ != other.rows_) fail(ErrorKind::Shape, "matrix product dimensions differ");
    IntMatrix out(rows_, other.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < other.cols_; ++j) {
            std::int64_t s = 0;
            for (std::size_t k = 0; k < cols_; ++k) s = checked_add(s, checked_mul((*this)(i, k), other(k, j)));
            out(i, j) = s;
        }
    return out;
}

IntVec IntMatrix::apply(std::span<const std::int64_t> v) const {
    if (v.size() != cols_) fail(ErrorKind::Shape, "matrix-vector dimensions differ");
    IntVec out(rows_, 0);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t k = 0; k < cols_; ++k) out[i] = checked_add(out[i], checked_mul((*this)(i, k), v[k]));
    return out;
}

BigVec IntMatrix::apply(std::span<const BigInt> v) const {
    if (v.size() != cols_) fail(ErrorKind::Shape, "matrix-vector dimensions differ");
    BigVec out(rows_, BigInt(0));
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t k = 0; k < cols_; ++k)
            if ((*this)(i, k) != 0) out[i] += (*this)(i, k) * v[k];
    return out;
}

IntMatrix IntMatrix::power(unsigned n) const {
    if (!is_square()) fail(ErrorKind::Shape, "power of a non-square matrix");
    IntMatrix out = identity(rows_);
    for (unsigned i = 0; i < n; ++i) out = out * (*this);
    return out;
}

BigInt IntMatrix::det() const {
    if (!is_square()) fail(ErrorKind::Shape, "determinant of a non-square matrix");
    return bareiss_det(std::vector<BigInt>(a_.begin(), a_.end()), rows_);
}

std::vector<IntVec> IntMatrix::to_rows() const {
    std::vector<IntVec> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i].assign(a_.begin() + i * cols_, a_.begin() + (i + 1) * cols_);
    return out;
}

std::string IntMatrix::to_string() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < rows_; ++i) {
        os << (i ? ",[" : "[");
        for (std::size_t j = 0; j < cols_; ++j) os << (j ? "," : "") << (*this)(i, j);
        os << ']';
    }
    os << ']';
    return os.str();
}

LatticeSolver::LatticeSolver(const IntMatrix& m) : dim_(m.rows()) {
    if (!m.is_square()) fail(ErrorKind::Shape, "lattice basis must be square");
    m_.resize(dim_ * dim_);
    for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t j = 0; j < dim_; ++j) m_[i * dim_ + j] = m(i, j);
    det_ = bareiss_det(m_, dim_);
    if (det_ == 0) fail(ErrorKind::Precondition, "singular matrix " + m.to_string());
    adj_.assign(dim_ * dim_, BigInt(0));
    if (dim_ == 1) {
        adj_[0] = 1;
        return;
    }
    // adj(M)_{ji} = (-1)^{i+j} det(minor_{ij})
    for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t j = 0; j < dim_; ++j) {
            std::vector<BigInt> minor;
            minor.reserve((dim_ - 1) * (dim_ - 1));
            for (std::size_t r = 0; r < dim_; ++r) {
                if (r == i) continue;
                for (std::size_t c = 0; c < dim_; ++c)
                    if (c != j) minor.push_back(m_[r * dim_ + c]);
            }
            BigInt cof = bareiss_det(std::move(minor), dim_ - 1);
            if ((i + j) % 2) cof = -cof;
            adj_[j * dim_ + i] = cof;
        }
}

BigVec LatticeSolver::adjugate_apply(std::span<const BigInt> v) const {
    if (v.size() != dim_) fail(ErrorKind::Shape, "vector dimension differs from lattice dimension");
    BigVec out(dim_, BigInt(0));
    for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t k = 0; k < dim_; ++k) out[i] += adj_[i * dim_ + k] * v[k];
    return out;
}

BigVec LatticeSolver::apply(std::span<const BigInt> v) const {
    if (v.size() != dim_) fail(ErrorKind::Shape, "vector dimension differs from lattice dimension");
    BigVec out(dim_, BigInt(0));
    for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t k = 0; k < dim_; ++k) out[i] += m_[i * dim_ + k] * v[k];
    return out;
}

BigVec LatticeSolver::floor_solve(std::span<const BigInt> v) const {
    BigVec x = adjugate_apply(v);
    for (auto& c : x) c = floor_div(c, det_);
    return x;
}

BigVec LatticeSolver::residue(std::span<const BigInt> v) const { return sub(v, apply(floor_solve(v))); }

bool LatticeSolver::in_lattice(std::span<const BigInt> v) const {
    const BigVec x = adjugate_apply(v);
    return std::all_of(x.begin(), x.end(), [&](const BigInt& c) { return c % det_ == 0; });
}

std::optional<BigVec> LatticeSolver::solve_integer(std::span<const BigInt> v) const {
    BigVec x = adjugate_apply(v);
    for (auto& c : x) {
        if (c % det_ != 0) return std::nullopt;
        c /= det_;
    }
    return x;
}

ExpansivenessCheck is_expansive(const IntMatrix& m) {
    if (!m.is_square()) fail(ErrorKind::Shape, "expansiveness needs a square matrix");
    double floor_modulus;
    if (m.rows() == 1) {
        floor_modulus = std::abs(static_cast<double>(m(0, 0)));
    } else {
        Eigen::EigenSolver<Eigen::MatrixXd> es(to_eigen(m), false);
        floor_modulus = es.eigenvalues().cwiseAbs().minCoeff();
    }
    return {floor_modulus > 1.0 + kExpansiveMargin, floor_modulus};
}

Contraction contraction_rate(const IntMatrix& m) {
    const auto check = is_expansive(m);
    if (!check.expansive) fail(ErrorKind::Precondition, "matrix " + m.to_string() + " is not expansive");
    const double floor_modulus = check.spectral_floor;
    const double margin = std::min(1e-3, (floor_modulus - 1.0) / 2.0);
    Contraction out;
    out.rho = (1.0 + margin) / floor_modulus;

    const Eigen::MatrixXd inv = to_eigen(m).inverse();
    const Eigen::MatrixXd scaled = inv / out.rho;
    // Fitted constant on n = 1..30.
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(m.rows(), m.rows());
    double fitted = 1.0;
    for (int n = 1; n <= 30; ++n) {
        power = power * scaled;
        fitted = std::max(fitted, op_norm(power));
    }
    // Once ‖(M^{-1}/rho)^k‖ <= 1 every later power is bounded by the maximum
    // over the first k, so the fit holds for all n.
    power = Eigen::MatrixXd::Identity(m.rows(), m.rows());
    double global = 1.0;
    constexpr int kMaxSteps = 1'000'000;
    int k = 1;
    for (; k <= kMaxSteps; ++k) {
        power = power * scaled;
        const double nrm = op_norm(power);
        if (nrm <= 1.0) break;
        global = std::max(global, nrm);
    }
    if (k > kMaxSteps) fail(ErrorKind::Consistency, "contraction envelope did not settle for " + m.to_string());
    out.C = std::max(fitted, global);

    // Re-verify the envelope on n = 1..30 with unscaled powers.
    power = Eigen::MatrixXd::Identity(m.rows(), m.rows());
    for (int n = 1; n <= 30; ++n) {
        power = power * inv;
        if (op_norm(power) > out.C * std::pow(out.rho, n) + 1e-12)
            fail(ErrorKind::Consistency, "contraction envelope failed re-verification at n=" + std::to_string(n));
    }
    return out;
}

ExpansiveIntMatrix::ExpansiveIntMatrix(IntMatrix m) : m_(std::move(m)) {
    const auto check = is_expansive(m_);
    if (!check.expansive)
        fail(ErrorKind::Precondition, "matrix " + m_.to_string() + " is not expansive (min eigenvalue modulus " +
                                          std::to_string(check.spectral_floor) + ")");
    det_ = m_.det();
    floor_ = check.spectral_floor;
    contraction_ = contraction_rate(m_);
}

ExpansiveIntMatrix ExpansiveIntMatrix::transpose() const {
    ExpansiveIntMatrix t;
    t.m_ = m_.transpose();
    t.det_ = det_;
    t.floor_ = floor_;
    t.contraction_ = contraction_;  // ‖A^t‖ = ‖A‖ for the operator 2-norm
    return t;
}

IntVectorSet::IntVectorSet(std::size_t dim, std::vector<IntVec> points) : dim_(dim), points_(std::move(points)) {
    if (dim_ == 0) fail(ErrorKind::Shape, "vector set of dimension 0");
    for (const auto& p : points_)
        if (p.size() != dim_) fail(ErrorKind::Shape, "point dimension differs from set dimension");
    std::sort(points_.begin(), points_.end());
    if (std::adjacent_find(points_.begin(), points_.end()) != points_.end())
        fail(ErrorKind::Parameter, "vector set contains duplicate points");
}

IntVectorSet IntVectorSet::from_scalars(const std::vector<std::int64_t>& values) {
    std::vector<IntVec> pts;
    pts.reserve(values.size());
    for (auto v : values) pts.push_back({v});
    return IntVectorSet(1, std::move(pts));
}

bool IntVectorSet::contains(const IntVec& v) const { return std::binary_search(points_.begin(), points_.end(), v); }

IntVectorSet IntVectorSet::translated(const IntVec& shift) const {
    if (shift.size() != dim_) fail(ErrorKind::Shape, "shift dimension differs from set dimension");
    std::vector<IntVec> pts = points_;
    for (auto& p : pts)
        for (std::size_t i = 0; i < dim_; ++i) p[i] = checked_add(p[i], shift[i]);
    return IntVectorSet(dim_, std::move(pts));
}

std::string IntVectorSet::to_string() const {
    std::ostringstream os;
    os << '{';
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (i) os << ", ";
        if (dim_ == 1) {
            os << points_[i][0];
            continue;
        }
        os << '(';
        for (std::size_t j = 0; j < dim_; ++j) os << (j ? "," : "") << points_[i][j];
        os << ')';
    }
    os << '}';
    return os.str();
}

bool residue_distinct(const IntMatrix& R, const IntVectorSet& S) {
    if (R.rows() != S.dim()) fail(ErrorKind::Shape, "matrix and vector set dimensions differ");
    const LatticeSolver solver(R);
    std::vector<BigVec> reps;
    reps.reserve(S.size());
    for (const auto& s : S.points()) reps.push_back(solver.residue(to_big(s)));
    std::sort(reps.begin(), reps.end());
    return std::adjacent_find(reps.begin(), reps.end()) == reps.end();
}

bool complete_residue_set(const IntMatrix& R, const IntVectorSet& S) {
    if (R.rows() != S.dim()) fail(ErrorKind::Shape, "matrix and vector set dimensions differ");
    const BigInt d = abs(R.det());
    return BigInt(S.size()) == d && residue_distinct(R, S);
}

IntTriple conjugate_triple(const IntMatrix& M, const IntTriple& sys) {
    if (!M.is_square() || M.rows() != sys.R.rows()) fail(ErrorKind::Shape, "conjugator dimension differs from system");
    const BigInt det = M.det();
    if (abs(det) != 1) fail(ErrorKind::Unimodularity, "conjugator has determinant " + det.str());
    const LatticeSolver solver(M);
    const std::size_t d = M.rows();
    IntMatrix inv(d, d);
    for (std::size_t j = 0; j < d; ++j) {
        BigVec e(d, BigInt(0));
        e[j] = 1;
        const auto col = to_int(*solver.solve_integer(e));
        for (std::size_t i = 0; i < d; ++i) inv(i, j) = col[i];
    }
    const IntMatrix inv_t = inv.transpose();
    std::vector<IntVec> b, l;
    for (const auto& p : sys.B.points()) b.push_back(M.apply(p));
    for (const auto& p : sys.L.points()) l.push_back(inv_t.apply(p));
    return {M * sys.R * inv, IntVectorSet(d, std::move(b)), IntVectorSet(d, std::move(l))};
}

IntVectorSet reduce_L_canonical(const IntMatrix& R, const IntVectorSet& L) {
    if (R.rows() != L.dim()) fail(ErrorKind::Shape, "matrix and vector set dimensions differ");
    const LatticeSolver solver(R.transpose());
    std::vector<IntVec> out;
    out.reserve(L.size());
    for (const auto& l : L.points()) out.push_back(to_int(solver.residue(to_big(l))));
    std::sort(out.begin(), out.end());
    if (std::adjacent_find(out.begin(), out.end()) != out.end())
        fail(ErrorKind::Consistency, "frequencies collide modulo R^t Z^d");
    return IntVectorSet(L.dim(), std::move(out));
}

std::int64_t gcd_digits(const IntVectorSet& B) {
    if (B.dim() != 1) fail(ErrorKind::Dimension, "gcd of digits is defined for d = 1 only");
    std::int64_t g = 0;
    for (const auto& p : B.points()) g = std::gcd(g, p[0]);
    return g;
}

std::vector<IntVec> cube_shell(std::size_t d, std::int64_t radius) {
    if (d == 0) fail(ErrorKind::Shape, "cube shell of dimension 0");
    if (radius < 0) fail(ErrorKind::Parameter, "negative shell radius");
    if (radius == 0) return {IntVec(d, 0)};
    std::vector<IntVec> out;
    IntVec k(d, -radius);
    for (;;) {
        if (std::any_of(k.begin(), k.end(), [&](std::int64_t c) { return c == radius || c == -radius; })) out.push_back(k);
        std::size_t i = d;
        while (i > 0) {
            --i;
            if (k[i] < radius) {
                ++k[i];
                break;
            }
            k[i] = -radius;
            if (i == 0) return out;
        }
    }
}

}  // namespace spectral_forge

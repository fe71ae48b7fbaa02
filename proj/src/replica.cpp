#include "mpsens/replica.hpp"

#include <fmt/format.h>

#include <Eigen/LU>

#include <cmath>
#include <numeric>

namespace mpsens {

namespace {

    using RowMajorMap      = Eigen::Map<Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
    using ConstRowMajorMap = Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

    Index ipow(Index b, Index e) {
        Index v = 1;
        while(e-- > 0) v *= b;
        return v;
    }

    Index product(const std::vector<Index> &dims, std::size_t from, std::size_t to) {
        Index p = 1;
        for(std::size_t i = from; i < to; ++i) p *= dims[i];
        return p;
    }

    // out = M applied on leg `leg` of a row-major tensor with shape `dims`.
    void apply_leg(const ComplexVector &in, std::vector<Index> &dims, std::size_t leg, const ComplexMatrix &m, ComplexVector &out) {
        const Index pre = product(dims, 0, leg), post = product(dims, leg + 1, dims.size());
        const Index din = dims[leg], dout = m.rows();
        out.resize(pre * dout * post);
        for(Index p = 0; p < pre; ++p) {
            ConstRowMajorMap src(in.data() + p * din * post, din, post);
            RowMajorMap      dst(out.data() + p * dout * post, dout, post);
            dst.noalias() = m * src;
        }
        dims[leg] = dout;
    }

    struct Contraction {
        const std::vector<ComplexMatrix> &ket;  // A^σ
        const std::vector<ComplexMatrix> &bra;  // conj(A^σ)
        const Permutation                &alpha;
        int                               k;
        ComplexVector                     out;
        std::vector<ComplexVector>        scratch;

        void run(int i, const ComplexVector &cur, const std::vector<Index> &dims) {
            if(i == k) {
                if(out.size() == 0)
                    out = cur;
                else
                    out += cur;
                return;
            }
            auto &tmp  = scratch[static_cast<std::size_t>(2 * i)];
            auto &next = scratch[static_cast<std::size_t>(2 * i + 1)];
            for(std::size_t s = 0; s < ket.size(); ++s) {
                auto d1 = dims;
                apply_leg(cur, d1, static_cast<std::size_t>(2 * i + 1), ket[s], tmp);
                apply_leg(tmp, d1, static_cast<std::size_t>(2 * alpha(i)), bra[s], next);
                run(i + 1, next, d1);
            }
        }
    };

    Index vector_dim(Index chi, int k) { return ipow(chi, 2 * k); }

    void check_budget(Index chi, int k, Index budget) {
        const double n = std::pow(static_cast<double>(chi), 2.0 * k);
        if(n > static_cast<double>(budget))
            throw BudgetExceeded(fmt::format("replica contraction: vector of dimension {}^{} exceeds the budget {}", chi, 2 * k, budget));
    }

    ComplexMatrix as_matrix(const ComplexVector &v, Index chi) { return ConstRowMajorMap(v.data(), chi, chi); }

    ComplexVector as_vector(const ComplexMatrix &m) {
        Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
        return Eigen::Map<const ComplexVector>(rm.data(), rm.size());
    }

    cplx bilinear(const ComplexVector &a, const ComplexVector &b) { return (a.transpose() * b).value(); }

} // namespace

ComplexVector replica_contract(const SiteTensor &a, const Permutation &alpha, const ComplexVector &v) {
    const int   k  = alpha.size();
    const Index cr = a.right_dim();
    if(k < 1) throw std::invalid_argument("replica_contract: empty permutation");
    if(v.size() != vector_dim(cr, k))
        throw DimensionError(fmt::format("replica_contract: vector has dimension {}, expected {}", v.size(), vector_dim(cr, k)));
    std::vector<ComplexMatrix> ket, bra;
    for(Index s = 0; s < a.phys_dim(); ++s) {
        ket.push_back(a[s]);
        bra.push_back(a[s].conjugate());
    }
    Contraction c{ket, bra, alpha, k, {}, std::vector<ComplexVector>(static_cast<std::size_t>(2 * k))};
    c.run(0, v, std::vector<Index>(static_cast<std::size_t>(2 * k), cr));
    return c.out;
}

ReplicaOperator::ReplicaOperator(const SiteTensor &a, Permutation alpha, ReplicaMode mode, Index dense_cap)
    : a_(&a), alpha_(std::move(alpha)), at_(a.transposed()), dense_cap_(dense_cap) {
    const bool fits = std::max(in_dim(), out_dim()) <= dense_cap_;
    if(mode == ReplicaMode::dense && !fits)
        throw BudgetExceeded(fmt::format("ReplicaOperator: dimension {} exceeds the dense cap {}", std::max(in_dim(), out_dim()), dense_cap_));
    if(mode == ReplicaMode::dense) dense_ = dense();
}

Index ReplicaOperator::in_dim() const { return vector_dim(a_->right_dim(), k()); }
Index ReplicaOperator::out_dim() const { return vector_dim(a_->left_dim(), k()); }

ComplexVector ReplicaOperator::apply(const ComplexVector &v) const {
    if(dense_) {
        if(v.size() != dense_->cols()) throw DimensionError("ReplicaOperator::apply: dimension mismatch");
        return *dense_ * v;
    }
    return replica_contract(*a_, alpha_, v);
}

ComplexVector ReplicaOperator::apply_left(const ComplexVector &v) const {
    if(dense_) {
        if(v.size() != dense_->rows()) throw DimensionError("ReplicaOperator::apply_left: dimension mismatch");
        return dense_->transpose() * v;
    }
    return replica_contract(at_, alpha_, v);
}

ComplexMatrix ReplicaOperator::dense() const {
    if(dense_) return *dense_;
    if(std::max(in_dim(), out_dim()) > dense_cap_)
        throw BudgetExceeded(fmt::format("ReplicaOperator: dimension {} exceeds the dense cap {}", std::max(in_dim(), out_dim()), dense_cap_));
    const int     k = this->k();
    const Index   d = a_->phys_dim();
    ComplexMatrix t = ComplexMatrix::Zero(out_dim(), in_dim());
    linalg::Config cfg;
    cfg.kron_cap = dense_cap_;
    std::vector<Index> sigma(static_cast<std::size_t>(k), 0);
    const Index        configs = ipow(d, k);
    for(Index c = 0; c < configs; ++c) {
        Index rest = c;
        for(int i = k - 1; i >= 0; --i) {
            sigma[static_cast<std::size_t>(i)] = rest % d;
            rest /= d;
        }
        // Bra leg j carries the sigma of the replica mapped onto it.
        const Permutation inv = alpha_.inverse();
        ComplexMatrix     acc = ComplexMatrix::Ones(1, 1);
        for(int j = 0; j < k; ++j) {
            acc = linalg::kron(acc, (*a_)[sigma[static_cast<std::size_t>(inv(j))]].conjugate(), cfg);
            acc = linalg::kron(acc, (*a_)[sigma[static_cast<std::size_t>(j)]], cfg);
        }
        t += acc;
    }
    return t;
}

ComplexVector replica_apply(const SiteTensor &a, const Permutation &alpha, const ComplexVector &v, ReplicaMode mode) {
    return ReplicaOperator(a, alpha, mode).apply(v);
}

ComplexVector replica_eigvals(const SiteTensor &a, int k, const Permutation &alpha, Index dense_cap) {
    if(alpha.size() != k) throw std::invalid_argument("replica_eigvals: permutation size differs from k");
    ReplicaOperator op(a, alpha, ReplicaMode::dense, dense_cap);
    linalg::Config  cfg;
    cfg.dense_cap = dense_cap;
    return linalg::eig_general(op.dense(), false, cfg).values;
}

ComplexVector replicate_pairing(const ComplexMatrix &m, const Permutation &alpha) {
    const int   k   = alpha.size();
    const Index chi = m.rows();
    if(m.cols() != chi) throw DimensionError("replicate_pairing: matrix must be square");
    // Build leg by leg: start from the k = 0 scalar and append (bra_j, ket_j).
    const Index        n = vector_dim(chi, k);
    ComplexVector      out(n);
    std::vector<Index> digit(static_cast<std::size_t>(2 * k));
    for(Index idx = 0; idx < n; ++idx) {
        Index rest = idx;
        for(int l = 2 * k - 1; l >= 0; --l) {
            digit[static_cast<std::size_t>(l)] = rest % chi;
            rest /= chi;
        }
        cplx v = 1.0;
        for(int i = 0; i < k && v != cplx(0.0); ++i)
            v *= m(digit[static_cast<std::size_t>(2 * alpha(i))], digit[static_cast<std::size_t>(2 * i + 1)]);
        out(idx) = v;
    }
    return out;
}

// ---------------------------------------------------------------- finite chains

BlockLayout BlockLayout::centered(Index n, Index r) {
    BlockLayout l;
    l.n       = n;
    l.a_begin = 0;
    l.a_end   = (n - r) / 2;
    l.b_begin = l.a_end + r;
    l.b_end   = n;
    l.validate();
    return l;
}

void BlockLayout::validate() const {
    if(!(0 <= a_begin && a_begin < a_end && a_end <= b_begin && b_begin < b_end && b_end <= n))
        throw std::invalid_argument(fmt::format("invalid block layout A=[{},{}) B=[{},{}) on {} sites", a_begin, a_end, b_begin, b_end, n));
}

double replica_trace(const MpsState &state, const std::vector<bool> &in_region, int k, Index budget) {
    if(state.is_uniform()) throw std::invalid_argument("replica_trace: finite states only");
    if(static_cast<Index>(in_region.size()) != state.size()) throw DimensionError("replica_trace: region mask has the wrong length");
    if(k < 1) throw std::invalid_argument("replica_trace: k must be positive");
    for(Index i = 0; i < state.size(); ++i) check_budget(state.site(i).left_dim(), k, budget);
    const Permutation e = Permutation::identity(k), c = Permutation::cycle(k);
    const Permutation e1 = Permutation::identity(1);
    ComplexVector     env = ComplexVector::Ones(1), nrm = ComplexVector::Ones(1);
    for(Index i = state.size() - 1; i >= 0; --i) {
        env = replica_contract(state.site(i), in_region[static_cast<std::size_t>(i)] ? c : e, env);
        nrm = replica_contract(state.site(i), e1, nrm);
    }
    return std::real(env(0)) / std::pow(std::real(nrm(0)), k);
}

MutualInfo renyi_mutual_info_finite(const MpsState &state, const BlockLayout &layout, int k, Index budget) {
    if(k < 2) throw std::invalid_argument("renyi_mutual_info_finite: k must be at least 2");
    layout.validate();
    if(layout.n != state.size()) throw DimensionError("renyi_mutual_info_finite: layout and state sizes differ");
    std::vector<bool> a(static_cast<std::size_t>(state.size()), false), b = a, ab = a;
    for(Index i = layout.a_begin; i < layout.a_end; ++i) a[static_cast<std::size_t>(i)] = ab[static_cast<std::size_t>(i)] = true;
    for(Index i = layout.b_begin; i < layout.b_end; ++i) b[static_cast<std::size_t>(i)] = ab[static_cast<std::size_t>(i)] = true;
    MutualInfo out;
    out.tr_ab = replica_trace(state, ab, k, budget);
    out.tr_a  = replica_trace(state, a, k, budget);
    out.tr_b  = replica_trace(state, b, k, budget);
    if(!(out.tr_ab > 0 && out.tr_a > 0 && out.tr_b > 0))
        throw NumericalError(fmt::format("renyi_mutual_info_finite: non-positive replica trace ({}, {}, {})", out.tr_ab, out.tr_a, out.tr_b));
    out.value = std::log(out.tr_ab / (out.tr_a * out.tr_b)) / (k - 1);
    return out;
}

// ---------------------------------------------------------------- uniform states

UniformFixedPoints uniform_fixed_points(const MpsState &uniform, double tol, Index max_iter) {
    if(!uniform.is_uniform()) throw std::invalid_argument("uniform_fixed_points: expected a uniform state");
    UniformFixedPoints fp;
    fp.cell.assign(uniform.sites().begin(), uniform.sites().end());
    const std::size_t len = fp.cell.size();
    const Permutation e1  = Permutation::identity(1);
    const Index       chi0 = fp.cell.front().left_dim();

    auto iterate = [&](bool left) {
        ComplexVector ref = as_vector(ComplexMatrix::Identity(chi0, chi0));
        ComplexVector v   = ref.normalized();
        for(Index it = 0; it < max_iter; ++it) {
            ComplexVector w = v;
            for(std::size_t s = 0; s < len; ++s) {
                const std::size_t j = left ? s : len - 1 - s;
                w = replica_contract(left ? fp.cell[j].transposed() : fp.cell[j], e1, w);
            }
            const double nrm = w.norm();
            if(!(nrm > 0)) throw ConvergenceError("uniform_fixed_points: transfer map annihilated the iterate");
            w /= nrm;
            const cplx ph = ref.dot(w);
            if(std::abs(ph) > 0) w *= std::conj(ph) / std::abs(ph);
            const double delta = (w - v).norm();
            v                  = std::move(w);
            if(delta < tol) return v;
        }
        throw ConvergenceError(fmt::format("uniform_fixed_points: power iteration not converged after {} steps", max_iter));
    };

    ComplexVector rho0 = iterate(false);
    // Leading eigenvalue of the whole cell, then spread the rescaling evenly.
    ComplexVector w = rho0;
    for(std::size_t s = 0; s < len; ++s) w = replica_contract(fp.cell[len - 1 - s], e1, w);
    const double eta = std::real(rho0.dot(w));
    if(!(eta > 0)) throw NumericalError("uniform_fixed_points: non-positive leading eigenvalue");
    const double scale = std::pow(eta, -0.5 / static_cast<double>(len));
    for(auto &t : fp.cell)
        for(Index s = 0; s < t.phys_dim(); ++s) t[s] *= scale;

    ComplexVector l0 = iterate(true);
    l0 /= bilinear(l0, rho0);

    std::vector<ComplexVector> rv(len), lv(len);
    rv[0] = rho0;
    lv[0] = l0;
    ComplexVector cur = rho0;
    for(std::size_t s = len - 1; s >= 1; --s) {
        cur   = replica_contract(fp.cell[s], e1, cur);
        rv[s] = cur;
    }
    cur = l0;
    for(std::size_t s = 0; s + 1 < len; ++s) {
        cur       = replica_contract(fp.cell[s].transposed(), e1, cur);
        lv[s + 1] = cur;
    }
    for(std::size_t j = 0; j < len; ++j) {
        const Index chi = fp.cell[j].left_dim();
        fp.l.push_back(as_matrix(lv[j], chi));
        fp.rho.push_back(as_matrix(rv[j], chi));
    }
    return fp;
}

std::vector<double> renyi_mutual_info_TI_curve(const MpsState &uniform, int k, Index r_max, Index budget) {
    if(k < 2) throw std::invalid_argument("renyi_mutual_info_TI: k must be at least 2");
    if(r_max < 1) throw std::invalid_argument("renyi_mutual_info_TI: r_max must be positive");
    const auto        fp  = uniform_fixed_points(uniform);
    const Index       len = static_cast<Index>(fp.cell.size());
    const Permutation e = Permutation::identity(k), c = Permutation::cycle(k);
    for(const auto &t : fp.cell) check_budget(t.left_dim(), k, budget);

    std::vector<ComplexVector> l_e, l_c, r_e, r_c;
    for(Index j = 0; j < len; ++j) {
        l_e.push_back(replicate_pairing(fp.l[static_cast<std::size_t>(j)], e));
        l_c.push_back(replicate_pairing(fp.l[static_cast<std::size_t>(j)], c));
        r_e.push_back(replicate_pairing(fp.rho[static_cast<std::size_t>(j)], e));
        r_c.push_back(replicate_pairing(fp.rho[static_cast<std::size_t>(j)], c));
    }
    std::vector<double> out(static_cast<std::size_t>(r_max), 0.0);
    for(Index b = 0; b < len; ++b) {
        // Right boundary on bond b; grow the gap leftwards one site at a time.
        ComplexVector v          = r_e[static_cast<std::size_t>(b)];
        const double  right_norm = std::real(bilinear(l_c[static_cast<std::size_t>(b)], r_e[static_cast<std::size_t>(b)]));
        Index         bond       = b;
        for(Index r = 1; r <= r_max; ++r) {
            bond = (bond - 1 + len) % len;
            v    = replica_contract(fp.cell[static_cast<std::size_t>(bond)], c, v);
            const double num       = std::real(bilinear(l_e[static_cast<std::size_t>(bond)], v));
            const double left_norm = std::real(bilinear(l_e[static_cast<std::size_t>(bond)], r_c[static_cast<std::size_t>(bond)]));
            const double ratio     = num / (left_norm * right_norm);
            if(!(ratio > 0)) throw NumericalError(fmt::format("renyi_mutual_info_TI: non-positive trace ratio {} at r = {}", ratio, r));
            out[static_cast<std::size_t>(r - 1)] += std::log(ratio) / (k - 1) / static_cast<double>(len);
        }
    }
    return out;
}

double renyi_mutual_info_spectral(const SiteTensor &a0, int k, Index r, Index dense_cap) {
    if(k < 2) throw std::invalid_argument("renyi_mutual_info_spectral: k must be at least 2");
    const Index chi = a0.left_dim();
    if(a0.right_dim() != chi) throw DimensionError("renyi_mutual_info_spectral: tensor must be square in the bond indices");
    if(std::pow(static_cast<double>(chi), 2.0 * k) > static_cast<double>(dense_cap))
        throw BudgetExceeded("renyi_mutual_info_spectral: chi^{2k} exceeds the dense cap");

    // T = sum conj(A) ⊗ A, diagonalised once; T_{C_k} inherits k-fold products.
    ComplexMatrix t = ComplexMatrix::Zero(chi * chi, chi * chi);
    for(Index s = 0; s < a0.phys_dim(); ++s) t += linalg::kron(a0[s].conjugate(), a0[s]);
    const auto                      eig = linalg::eig_general(t, true);
    const ComplexMatrix            &rv  = *eig.vectors;
    Eigen::FullPivLU<ComplexMatrix> lu(rv);
    if(!lu.isInvertible()) throw NumericalError("renyi_mutual_info_spectral: transfer matrix is not diagonalisable");
    const ComplexMatrix lv = lu.inverse();
    Index               m1 = 0;
    for(Index i = 1; i < eig.values.size(); ++i)
        if(std::abs(eig.values(i)) > std::abs(eig.values(m1))) m1 = i;
    const cplx lam1 = eig.values(m1);

    const Index                n = chi * chi;
    const ComplexMatrix        big_l = as_matrix(lv.row(m1).transpose(), chi);
    const ComplexMatrix        big_r = as_matrix(rv.col(m1), chi);
    std::vector<ComplexMatrix> x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
    for(Index m = 0; m < n; ++m) {
        x[static_cast<std::size_t>(m)] = big_l * as_matrix(rv.col(m), chi).transpose();
        y[static_cast<std::size_t>(m)] = big_r * as_matrix(lv.row(m).transpose(), chi).transpose();
    }
    auto trace_power = [&](const std::vector<ComplexMatrix> &mats, Index m) {
        ComplexMatrix p = ComplexMatrix::Identity(chi, chi);
        for(int i = 0; i < k; ++i) p = p * mats[static_cast<std::size_t>(m)];
        return p.trace();
    };
    const cplx den = trace_power(x, m1) * trace_power(y, m1);

    cplx               sum = 0;
    std::vector<Index> tuple(static_cast<std::size_t>(k), 0);
    const Index        tuples = ipow(n, k);
    for(Index idx = 0; idx < tuples; ++idx) {
        Index rest = idx;
        bool  lead = true;
        for(int i = k - 1; i >= 0; --i) {
            tuple[static_cast<std::size_t>(i)] = rest % n;
            rest /= n;
            lead = lead && tuple[static_cast<std::size_t>(i)] == m1;
        }
        if(lead) continue;
        cplx          lambda = 1.0;
        ComplexMatrix px = ComplexMatrix::Identity(chi, chi), py = px;
        for(int i = 0; i < k; ++i) {
            const auto m = static_cast<std::size_t>(tuple[static_cast<std::size_t>(i)]);
            lambda *= eig.values(static_cast<Index>(m)) / lam1;
            px = px * x[m];
            py = py * y[m];
        }
        cplx w = 1.0;
        for(Index i = 0; i < r; ++i) w *= lambda;
        sum += w * px.trace() * py.trace();
    }
    const double arg = std::real(1.0 + sum / den);
    if(!(arg > 0)) throw NumericalError("renyi_mutual_info_spectral: non-positive argument of the logarithm");
    return std::log(arg) / (k - 1);
}

double renyi_mutual_info_TI(const MpsState &uniform, int k, Index r, TiMutualInfoPaths *paths, Index dense_cap, Index budget) {
    if(r < 1) throw std::invalid_argument("renyi_mutual_info_TI: r must be at least 1");
    TiMutualInfoPaths res;
    res.trace_ratio = renyi_mutual_info_TI_curve(uniform, k, r, budget).back();
    const Index chi = uniform.site(0).left_dim();
    if(uniform.size() == 1 && std::pow(static_cast<double>(chi), 2.0 * k) <= static_cast<double>(dense_cap)) {
        res.spectral           = renyi_mutual_info_spectral(uniform.site(0), k, r, dense_cap);
        res.spectral_available = true;
    }
    if(paths) *paths = res;
    if(res.spectral_available && std::abs(res.spectral - res.trace_ratio) > 1e-8)
        throw NumericalError(fmt::format("renyi_mutual_info_TI: eigen-expansion {} and trace ratio {} disagree", res.spectral, res.trace_ratio));
    return res.trace_ratio;
}

} // namespace mpsens

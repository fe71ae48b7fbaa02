#pragma once

#include "mpsens/mps.hpp"
#include "mpsens/rng.hpp"

#include <vector>

namespace testing_helpers {

using namespace mpsens;

inline ComplexMatrix random_matrix(Index rows, Index cols, CounterRng &rng) {
    ComplexMatrix m(rows, cols);
    for(Index j = 0; j < cols; ++j)
        for(Index i = 0; i < rows; ++i) m(i, j) = rng.complex_normal();
    return m;
}

inline ComplexVector random_vector(Index n, CounterRng &rng) { return random_matrix(n, 1, rng).col(0); }

inline SiteTensor random_tensor(Index left, Index d, Index right, CounterRng &rng) {
    std::vector<ComplexMatrix> s;
    for(Index i = 0; i < d; ++i) s.push_back(random_matrix(left, right, rng));
    return SiteTensor(std::move(s));
}

/// Random finite MPS with open boundaries and bond dimension chi in the bulk.
inline MpsState random_mps(Index n, Index d, Index chi, CounterRng &rng) {
    std::vector<SiteTensor> t;
    Index                   left = 1;
    for(Index i = 0; i < n; ++i) {
        const Index right = (i == n - 1) ? 1 : chi;
        t.push_back(random_tensor(left, d, right, rng));
        left = right;
    }
    const double nrm = norm(MpsState::from_tensors(t));
    for(Index s = 0; s < d; ++s) t[0][s] /= nrm;
    auto st = MpsState::from_tensors(std::move(t));
    st.canonicalize(0);
    return st;
}

/// Square random tensor, not normalised.
inline SiteTensor random_square_tensor(Index chi, Index d, CounterRng &rng) { return random_tensor(chi, d, chi, rng); }

} // namespace testing_helpers

#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace diffkit {

// A D-dimensional sample (x_t, x0, eps, ...). Dimension is carried by the
// vector itself; operations reject mismatched sizes.
using StateVector = Eigen::VectorXd;

// Additive known component y plus an opaque tag d. The tag is carried through
// but never interpreted.
struct Condition {
    StateVector y;
    std::string d;
};

inline void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

inline void require_finite(const StateVector& v, const std::string& what) {
    if (!v.allFinite()) throw std::invalid_argument(what + ": non-finite entries");
}

inline void require_same_dim(const StateVector& a, const StateVector& b,
                             const std::string& what) {
    if (a.size() != b.size())
        throw std::invalid_argument(what + ": dimension mismatch (" +
                                    std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()) + ")");
}

}  // namespace diffkit

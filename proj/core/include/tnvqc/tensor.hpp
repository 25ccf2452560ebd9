#pragma once

#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tnvqc/errors.hpp"

namespace tnvqc {

using Shape = std::vector<std::size_t>;
using AxisPair = std::pair<std::size_t, std::size_t>;

namespace detail {

inline std::size_t shape_size(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           std::multiplies<>());
}

inline std::string shape_str(const Shape& shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + ")";
}

inline std::vector<std::size_t> row_major_strides(const Shape& shape) {
    std::vector<std::size_t> strides(shape.size());
    std::size_t acc = 1;
    for (std::size_t i = shape.size(); i-- > 0;) {
        strides[i] = acc;
        acc *= shape[i];
    }
    return strides;
}

}  // namespace detail

// Dense multidimensional array with row-major flat storage. Rank 0 (empty
// shape, one element) represents a scalar, as produced by fully-paired
// contractions. Values are immutable in practice: operations return new
// tensors and never alias inputs.
template <typename Scalar>
class DenseTensor {
  public:
    DenseTensor() : shape_{}, data_(1, Scalar{}) {}

    explicit DenseTensor(Shape shape)
        : shape_(std::move(shape)), data_(checked_size(shape_), Scalar{}) {}

    DenseTensor(Shape shape, std::vector<Scalar> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (data_.size() != checked_size(shape_)) {
            throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                                 " does not match shape " + detail::shape_str(shape_));
        }
    }

    static DenseTensor scalar(Scalar v) {
        DenseTensor t;
        t.data_[0] = v;
        return t;
    }

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t extent(std::size_t axis) const {
        if (axis >= shape_.size()) {
            throw IndexError("axis " + std::to_string(axis) + " out of range for rank " +
                             std::to_string(shape_.size()));
        }
        return shape_[axis];
    }

    std::span<const Scalar> data() const { return data_; }
    std::span<Scalar> data() { return data_; }

    // Value of a rank-0 / single-element tensor.
    Scalar item() const {
        if (data_.size() != 1) {
            throw UsageError("item() requires a single-element tensor, size is " +
                             std::to_string(data_.size()));
        }
        return data_[0];
    }

    template <typename... Index>
    Scalar& operator()(Index... idx) {
        return data_[flat_index({static_cast<std::size_t>(idx)...})];
    }
    template <typename... Index>
    const Scalar& operator()(Index... idx) const {
        return data_[flat_index({static_cast<std::size_t>(idx)...})];
    }

    // Same flat data under a new shape; element count must be preserved.
    DenseTensor reshape(Shape new_shape) const {
        if (detail::shape_size(new_shape) != data_.size()) {
            throw DimensionError("cannot reshape " + detail::shape_str(shape_) + " to " +
                                 detail::shape_str(new_shape) + ": element counts differ");
        }
        return DenseTensor(std::move(new_shape), data_);
    }

  private:
    static std::size_t checked_size(const Shape& shape) {
        for (std::size_t e : shape) {
            if (e == 0) throw DimensionError("tensor extents must be positive");
        }
        return detail::shape_size(shape);
    }

    std::size_t flat_index(std::initializer_list<std::size_t> idx) const {
        if (idx.size() != shape_.size()) {
            throw IndexError("expected " + std::to_string(shape_.size()) + " indices, got " +
                             std::to_string(idx.size()));
        }
        std::size_t flat = 0;
        std::size_t axis = 0;
        for (std::size_t i : idx) {
            if (i >= shape_[axis]) {
                throw IndexError("index " + std::to_string(i) + " out of range for axis " +
                                 std::to_string(axis));
            }
            flat = flat * shape_[axis] + i;
            ++axis;
        }
        return flat;
    }

    Shape shape_;
    std::vector<Scalar> data_;
};

using RealTensor = DenseTensor<double>;
using ComplexTensor = DenseTensor<std::complex<double>>;

// Copy with axes reordered: result axis i is input axis perm[i].
template <typename Scalar>
DenseTensor<Scalar> permute(const DenseTensor<Scalar>& t, std::span<const std::size_t> perm) {
    if (perm.size() != t.rank()) {
        throw DimensionError("permutation length " + std::to_string(perm.size()) +
                             " does not match rank " + std::to_string(t.rank()));
    }
    std::vector<bool> seen(t.rank(), false);
    for (std::size_t p : perm) {
        if (p >= t.rank()) throw IndexError("permutation axis out of range");
        if (seen[p]) throw InputError("permutation repeats an axis");
        seen[p] = true;
    }
    Shape new_shape(t.rank());
    for (std::size_t i = 0; i < t.rank(); ++i) new_shape[i] = t.shape()[perm[i]];

    DenseTensor<Scalar> out(new_shape);
    if (t.rank() == 0) {
        out.data()[0] = t.data()[0];
        return out;
    }
    const auto in_strides = detail::row_major_strides(t.shape());
    // Odometer walk over the output in row-major order, tracking the
    // corresponding input offset incrementally.
    std::vector<std::size_t> perm_strides(t.rank());
    for (std::size_t i = 0; i < t.rank(); ++i) perm_strides[i] = in_strides[perm[i]];
    std::vector<std::size_t> counter(t.rank(), 0);
    std::size_t in_off = 0;
    const auto in = t.data();
    auto out_data = out.data();
    for (std::size_t o = 0; o < out.size(); ++o) {
        out_data[o] = in[in_off];
        for (std::size_t axis = t.rank(); axis-- > 0;) {
            in_off += perm_strides[axis];
            if (++counter[axis] < new_shape[axis]) break;
            in_off -= perm_strides[axis] * new_shape[axis];
            counter[axis] = 0;
        }
    }
    return out;
}

// Tensor contraction over the given axis pairs (a-axis, b-axis). Result
// carries the free axes of a (in order) followed by the free axes of b.
// Implemented by permuting both operands to matrices and multiplying.
template <typename Scalar>
DenseTensor<Scalar> contract(const DenseTensor<Scalar>& a, const DenseTensor<Scalar>& b,
                             std::span<const AxisPair> axes) {
    std::vector<bool> a_paired(a.rank(), false), b_paired(b.rank(), false);
    for (const auto& [ax_a, ax_b] : axes) {
        if (ax_a >= a.rank() || ax_b >= b.rank()) {
            throw IndexError("contraction axis out of range: (" + std::to_string(ax_a) + "," +
                             std::to_string(ax_b) + ")");
        }
        if (a_paired[ax_a] || b_paired[ax_b]) {
            throw InputError("contraction pairs an axis twice");
        }
        if (a.shape()[ax_a] != b.shape()[ax_b]) {
            throw DimensionError("paired axes have extents " + std::to_string(a.shape()[ax_a]) +
                                 " and " + std::to_string(b.shape()[ax_b]));
        }
        a_paired[ax_a] = true;
        b_paired[ax_b] = true;
    }

    std::vector<std::size_t> a_perm, b_perm;
    Shape out_shape;
    std::size_t m = 1, k = 1, n = 1;
    for (std::size_t i = 0; i < a.rank(); ++i) {
        if (!a_paired[i]) {
            a_perm.push_back(i);
            out_shape.push_back(a.shape()[i]);
            m *= a.shape()[i];
        }
    }
    for (const auto& [ax_a, ax_b] : axes) {
        a_perm.push_back(ax_a);
        k *= a.shape()[ax_a];
    }
    for (const auto& [ax_a, ax_b] : axes) b_perm.push_back(ax_b);
    for (std::size_t i = 0; i < b.rank(); ++i) {
        if (!b_paired[i]) {
            b_perm.push_back(i);
            out_shape.push_back(b.shape()[i]);
            n *= b.shape()[i];
        }
    }

    const bool a_ordered = std::is_sorted(a_perm.begin(), a_perm.end());
    const bool b_ordered = std::is_sorted(b_perm.begin(), b_perm.end());
    const DenseTensor<Scalar> a_mat = a_ordered ? a : permute(a, std::span<const std::size_t>(a_perm));
    const DenseTensor<Scalar> b_mat = b_ordered ? b : permute(b, std::span<const std::size_t>(b_perm));

    DenseTensor<Scalar> out(out_shape);
    const Scalar* pa = a_mat.data().data();
    const Scalar* pb = b_mat.data().data();
    Scalar* pc = out.data().data();
    // (m x k) * (k x n), row-major; ikj loop order keeps the inner stride 1.
    for (std::size_t i = 0; i < m; ++i) {
        Scalar* ci = pc + i * n;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const Scalar av = pa[i * k + kk];
            const Scalar* bk = pb + kk * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += av * bk[j];
        }
    }
    return out;
}

template <typename Scalar>
DenseTensor<Scalar> contract(const DenseTensor<Scalar>& a, const DenseTensor<Scalar>& b,
                             std::initializer_list<AxisPair> axes) {
    return contract(a, b, std::span<const AxisPair>(axes.begin(), axes.size()));
}

// Outer product of one or more tensors; result shape is the concatenation
// of the factor shapes.
template <typename Scalar>
DenseTensor<Scalar> outer(std::span<const DenseTensor<Scalar>> factors) {
    if (factors.empty()) throw InputError("outer() needs at least one factor");
    Shape out_shape;
    std::size_t total = 1;
    for (const auto& f : factors) {
        out_shape.insert(out_shape.end(), f.shape().begin(), f.shape().end());
        total *= f.size();
    }
    std::vector<Scalar> data(total, Scalar{1});
    std::size_t block = 1;  // elements written per repetition so far
    for (const auto& f : factors) {
        const auto fd = f.data();
        // Expand in place: data[0..block*size) = old-block x factor.
        for (std::size_t rep = block; rep-- > 0;) {
            const Scalar base = data[rep];
            for (std::size_t j = f.size(); j-- > 0;) {
                data[rep * f.size() + j] = base * fd[j];
            }
        }
        block *= f.size();
    }
    return DenseTensor<Scalar>(std::move(out_shape), std::move(data));
}

template <typename Scalar>
DenseTensor<Scalar> outer(std::initializer_list<DenseTensor<Scalar>> factors) {
    return outer(std::span<const DenseTensor<Scalar>>(factors.begin(), factors.size()));
}

}  // namespace tnvqc

// SPDX-License-Identifier: Apache-2.0
//
// swipt-ee — energy-efficient resource allocation for multiuser OFDM downlinks
// with simultaneous wireless information and power transfer
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef SWIPT_MATRIX_HPP
#define SWIPT_MATRIX_HPP

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace swipt {

// Dense row-major matrix of doubles. All model quantities indexed by
// (subcarrier i, user k) live in one of these; no linear algebra is needed,
// only element access and whole-matrix sweeps.
class matrix
{
  public:
    matrix() = default;

    matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : n_rows_(rows), n_cols_(cols), data_(rows * cols, fill)
    {
    }

    std::size_t rows() const { return n_rows_; }
    std::size_t cols() const { return n_cols_; }
    std::size_t size() const { return data_.size(); }

    double &operator()(std::size_t i, std::size_t j) { return data_[i * n_cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * n_cols_ + j]; }

    double &at(std::size_t i, std::size_t j)
    {
        check_index(i, j);
        return data_[i * n_cols_ + j];
    }
    double at(std::size_t i, std::size_t j) const
    {
        check_index(i, j);
        return data_[i * n_cols_ + j];
    }

    double *data() { return data_.data(); }
    const double *data() const { return data_.data(); }

    void fill(double value)
    {
        for (auto &v : data_)
            v = value;
    }

    bool same_shape(const matrix &other) const
    {
        return n_rows_ == other.n_rows_ && n_cols_ == other.n_cols_;
    }

    friend bool operator==(const matrix &a, const matrix &b)
    {
        return a.n_rows_ == b.n_rows_ && a.n_cols_ == b.n_cols_ && a.data_ == b.data_;
    }

  private:
    void check_index(std::size_t i, std::size_t j) const
    {
        if (i >= n_rows_ || j >= n_cols_)
            throw std::out_of_range("matrix: index out of range");
    }

    std::size_t n_rows_ = 0;
    std::size_t n_cols_ = 0;
    std::vector<double> data_;
};

} // namespace swipt

#endif

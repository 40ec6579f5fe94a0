#pragma once

// Minimal reverse-mode differentiation over dense row-major double matrices.
//
// A Tape records every operation in execution order. backward() walks the
// records in exact reverse order and accumulates analytic gradients into
// every node that (transitively) depends on a parameter leaf.

#include "spatial3d/geometry.hpp"

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace spatial3d::ad {

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
    Matrix(std::size_t r, std::size_t c, std::vector<double> values);
    Matrix(std::initializer_list<std::initializer_list<double>> rows_init);

    static Matrix identity(std::size_t n);

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::size_t size() const { return data.size(); }
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
    bool all_finite() const;

    friend bool operator==(const Matrix&, const Matrix&) = default;
};

/// Plain (non-recorded) product, used by oracles and value-level code.
Matrix multiply(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

/// n x 3 matrix from points and back.
Matrix points_to_matrix(std::span<const Point3> points);
std::vector<Point3> matrix_to_points(const Matrix& m);

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
public:
    Var() = default;

    Tape& tape() const { return *tape_; }
    std::size_t id() const { return id_; }
    const Matrix& value() const;
    const Matrix& grad() const;
    std::size_t rows() const { return value().rows; }
    std::size_t cols() const { return value().cols; }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

class Tape {
public:
    /// Receives the gradient of the node's output and accumulates into inputs.
    using BackwardFn = std::function<void(Tape&, const Matrix& out_grad)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Matrix value);
    Var parameter(Matrix value);

    /// Appends an operation node. Throws NumericError naming `op` if the
    /// value is not finite.
    Var record(const char* op, Matrix value, std::initializer_list<Var> inputs, BackwardFn backward);

    const Matrix& value(Var v) const;
    const Matrix& grad(Var v) const;
    bool requires_grad(Var v) const;

    /// Adds `g` into the gradient buffer of `v` (no-op for constants).
    void accumulate(Var v, const Matrix& g);
    double* grad_data(Var v);

    /// Seeds d(loss)/d(loss) = 1 for a 1x1 node and back-propagates.
    void backward(Var loss);

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        const char* op = "leaf";
        Matrix value;
        Matrix grad;
        bool requires_grad = false;
        BackwardFn backward;
    };

    Var push(Node node);
    void check_owner(Var v) const;

    std::vector<Node> nodes_;
};

Var matmul(Var a, Var b);
/// Elementwise sum; `b` may also be a 1 x cols row vector broadcast over rows.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var scale(Var a, double s);
Var relu(Var a);
Var abs(Var a);
Var transpose(Var a);
Var softmax_rows(Var a);
Var concat_cols(Var a, Var b);
Var gather_rows(Var a, std::span<const std::size_t> rows);
/// Per group, the columnwise max over member rows. Backward routes the
/// gradient to the argmax member only (ties: lowest row index).
Var max_pool_groups(Var a, const NeighborGroups& groups);
/// Mean of all entries, as a 1x1 node.
Var mean(Var a);
/// Euclidean norm of each row, as a rows x 1 node. Gradient at a zero row is 0.
Var l2_norm_rows(Var a);

struct GradCheckEntry {
    std::string name;
    double max_abs_error = 0.0;
    double max_rel_error = 0.0;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    double max_rel_error = 0.0;
    std::size_t coordinates = 0;
    bool passed = false;
};

/// Builds a scalar on a fresh tape from parameter leaves created in the same
/// order as the `params` passed to grad_check.
using ScalarBuilder = std::function<Var(Tape&, std::span<const Var>)>;

struct NamedMatrix {
    std::string name;
    Matrix value;
};

struct GradCheckOptions {
    double eps = 1e-6;
    double tol = 1e-6;
    /// Lower bound on the relative-error denominator max(|analytic|, |numeric|).
    double denominator_floor = 1e-6;
};

/// Central finite differences (f(t+eps) - f(t-eps)) / 2 eps per coordinate,
/// compared against one reverse pass. Throws NumericError if f is not finite.
GradCheckReport grad_check(const ScalarBuilder& f, std::span<const NamedMatrix> params,
                           const GradCheckOptions& options = {});

double relative_error(double analytic, double numeric, double floor);

} // namespace spatial3d::ad

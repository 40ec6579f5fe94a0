#include "spatial3d/diff_core.hpp"

#include "spatial3d/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace spatial3d::ad {

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> values)
    : rows(r), cols(c), data(std::move(values))
{
    if (data.size() != r * c) {
        throw InvalidArgument("Matrix: value count does not match shape");
    }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows_init)
{
    rows = rows_init.size();
    cols = rows ? rows_init.begin()->size() : 0;
    data.reserve(rows * cols);
    for (const auto& row : rows_init) {
        if (row.size() != cols) {
            throw InvalidArgument("Matrix: ragged initializer");
        }
        data.insert(data.end(), row.begin(), row.end());
    }
}

Matrix Matrix::identity(std::size_t n)
{
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

bool Matrix::all_finite() const
{
    return std::all_of(data.begin(), data.end(), [](double v) { return std::isfinite(v); });
}

Matrix multiply(const Matrix& a, const Matrix& b)
{
    if (a.cols != b.rows) {
        throw InvalidArgument("multiply: inner dimensions differ (" + std::to_string(a.cols) +
                              " vs " + std::to_string(b.rows) + ")");
    }
    Matrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) {
                continue;
            }
            for (std::size_t j = 0; j < b.cols; ++j) {
                out(i, j) += aik * b(k, j);
            }
        }
    }
    return out;
}

Matrix transpose(const Matrix& a)
{
    Matrix out(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t j = 0; j < a.cols; ++j) {
            out(j, i) = a(i, j);
        }
    }
    return out;
}

Matrix points_to_matrix(std::span<const Point3> points)
{
    Matrix m(points.size(), 3);
    for (std::size_t i = 0; i < points.size(); ++i) {
        m(i, 0) = points[i].x;
        m(i, 1) = points[i].y;
        m(i, 2) = points[i].z;
    }
    return m;
}

std::vector<Point3> matrix_to_points(const Matrix& m)
{
    if (m.cols != 3) {
        throw InvalidArgument("matrix_to_points: expected 3 columns");
    }
    std::vector<Point3> out(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) {
        out[i] = {m(i, 0), m(i, 1), m(i, 2)};
    }
    return out;
}

const Matrix& Var::value() const { return tape_->value(*this); }
const Matrix& Var::grad() const { return tape_->grad(*this); }

Var Tape::push(Node node)
{
    nodes_.push_back(std::move(node));
    return Var(this, nodes_.size() - 1);
}

void Tape::check_owner(Var v) const
{
    if (v.tape_ != this || v.id_ >= nodes_.size()) {
        throw InvalidArgument("Var does not belong to this tape");
    }
}

Var Tape::constant(Matrix value)
{
    if (!value.all_finite()) {
        throw NumericError("constant: non-finite value");
    }
    Node n;
    n.grad = Matrix(value.rows, value.cols);
    n.value = std::move(value);
    return push(std::move(n));
}

Var Tape::parameter(Matrix value)
{
    if (!value.all_finite()) {
        throw NumericError("parameter: non-finite value");
    }
    Node n;
    n.grad = Matrix(value.rows, value.cols);
    n.value = std::move(value);
    n.requires_grad = true;
    return push(std::move(n));
}

Var Tape::record(const char* op, Matrix value, std::initializer_list<Var> inputs, BackwardFn backward)
{
    bool needs = false;
    for (const Var& v : inputs) {
        check_owner(v);
        needs = needs || nodes_[v.id_].requires_grad;
    }
    if (!value.all_finite()) {
        throw NumericError(std::string(op) + ": non-finite forward value");
    }
    Node n;
    n.op = op;
    n.grad = Matrix(value.rows, value.cols);
    n.value = std::move(value);
    n.requires_grad = needs;
    if (needs) {
        n.backward = std::move(backward);
    }
    return push(std::move(n));
}

const Matrix& Tape::value(Var v) const
{
    check_owner(v);
    return nodes_[v.id_].value;
}

const Matrix& Tape::grad(Var v) const
{
    check_owner(v);
    return nodes_[v.id_].grad;
}

bool Tape::requires_grad(Var v) const
{
    check_owner(v);
    return nodes_[v.id_].requires_grad;
}

void Tape::accumulate(Var v, const Matrix& g)
{
    check_owner(v);
    Node& n = nodes_[v.id_];
    if (!n.requires_grad) {
        return;
    }
    if (!n.grad.same_shape(g)) {
        throw InvalidArgument("accumulate: gradient shape mismatch");
    }
    for (std::size_t i = 0; i < g.data.size(); ++i) {
        n.grad.data[i] += g.data[i];
    }
}

double* Tape::grad_data(Var v)
{
    check_owner(v);
    Node& n = nodes_[v.id_];
    return n.requires_grad ? n.grad.data.data() : nullptr;
}

void Tape::backward(Var loss)
{
    check_owner(loss);
    if (nodes_[loss.id_].value.size() != 1) {
        throw InvalidArgument("backward: loss must be a 1x1 node");
    }
    for (Node& n : nodes_) {
        std::fill(n.grad.data.begin(), n.grad.data.end(), 0.0);
    }
    nodes_[loss.id_].grad.data[0] = 1.0;
    for (std::size_t i = loss.id_ + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.requires_grad || !n.backward) {
            continue;
        }
        if (!n.grad.all_finite()) {
            throw NumericError(std::string(n.op) + ": non-finite gradient");
        }
        n.backward(*this, n.grad);
    }
}

namespace {

void require(bool ok, const char* op, const char* what)
{
    if (!ok) {
        throw InvalidArgument(std::string(op) + ": " + what);
    }
}

void same_tape(Var a, Var b, const char* op)
{
    require(&a.tape() == &b.tape(), op, "operands live on different tapes");
}

} // namespace

Var matmul(Var a, Var b)
{
    same_tape(a, b, "matmul");
    const Matrix& av = a.value();
    const Matrix& bv = b.value();
    require(av.cols == bv.rows, "matmul", "inner dimensions differ");
    return a.tape().record("matmul", multiply(av, bv), {a, b}, [a, b](Tape& t, const Matrix& g) {
        if (t.requires_grad(a)) {
            t.accumulate(a, multiply(g, transpose(b.value())));
        }
        if (t.requires_grad(b)) {
            t.accumulate(b, multiply(transpose(a.value()), g));
        }
    });
}

Var add(Var a, Var b)
{
    same_tape(a, b, "add");
    const Matrix& av = a.value();
    const Matrix& bv = b.value();
    const bool broadcast = bv.rows == 1 && bv.cols == av.cols && av.rows != 1;
    require(av.same_shape(bv) || broadcast, "add", "shape mismatch");
    Matrix out = av;
    for (std::size_t i = 0; i < out.rows; ++i) {
        for (std::size_t j = 0; j < out.cols; ++j) {
            out(i, j) += broadcast ? bv(0, j) : bv(i, j);
        }
    }
    return a.tape().record("add", std::move(out), {a, b}, [a, b, broadcast](Tape& t, const Matrix& g) {
        t.accumulate(a, g);
        if (!t.requires_grad(b)) {
            return;
        }
        if (!broadcast) {
            t.accumulate(b, g);
            return;
        }
        Matrix gb(1, g.cols);
        for (std::size_t i = 0; i < g.rows; ++i) {
            for (std::size_t j = 0; j < g.cols; ++j) {
                gb(0, j) += g(i, j);
            }
        }
        t.accumulate(b, gb);
    });
}

Var sub(Var a, Var b)
{
    same_tape(a, b, "sub");
    const Matrix& av = a.value();
    const Matrix& bv = b.value();
    require(av.same_shape(bv), "sub", "shape mismatch");
    Matrix out = av;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] -= bv.data[i];
    }
    return a.tape().record("sub", std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
        t.accumulate(a, g);
        if (t.requires_grad(b)) {
            Matrix neg = g;
            for (double& v : neg.data) {
                v = -v;
            }
            t.accumulate(b, neg);
        }
    });
}

Var scale(Var a, double s)
{
    Matrix out = a.value();
    for (double& v : out.data) {
        v *= s;
    }
    return a.tape().record("scale", std::move(out), {a}, [a, s](Tape& t, const Matrix& g) {
        Matrix ga = g;
        for (double& v : ga.data) {
            v *= s;
        }
        t.accumulate(a, ga);
    });
}

Var relu(Var a)
{
    Matrix out = a.value();
    for (double& v : out.data) {
        v = v > 0.0 ? v : 0.0;
    }
    return a.tape().record("relu", std::move(out), {a}, [a](Tape& t, const Matrix& g) {
        const Matrix& x = a.value();
        Matrix ga(g.rows, g.cols);
        for (std::size_t i = 0; i < g.data.size(); ++i) {
            ga.data[i] = x.data[i] > 0.0 ? g.data[i] : 0.0;
        }
        t.accumulate(a, ga);
    });
}

Var abs(Var a)
{
    Matrix out = a.value();
    for (double& v : out.data) {
        v = std::abs(v);
    }
    return a.tape().record("abs", std::move(out), {a}, [a](Tape& t, const Matrix& g) {
        const Matrix& x = a.value();
        Matrix ga(g.rows, g.cols);
        for (std::size_t i = 0; i < g.data.size(); ++i) {
            const double x_i = x.data[i];
            ga.data[i] = x_i > 0.0 ? g.data[i] : (x_i < 0.0 ? -g.data[i] : 0.0);
        }
        t.accumulate(a, ga);
    });
}

Var transpose(Var a)
{
    return a.tape().record("transpose", transpose(a.value()), {a},
                           [a](Tape& t, const Matrix& g) { t.accumulate(a, transpose(g)); });
}

Var softmax_rows(Var a)
{
    const Matrix& x = a.value();
    Matrix out(x.rows, x.cols);
    for (std::size_t i = 0; i < x.rows; ++i) {
        double row_max = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < x.cols; ++j) {
            row_max = std::max(row_max, x(i, j));
        }
        double total = 0.0;
        for (std::size_t j = 0; j < x.cols; ++j) {
            out(i, j) = std::exp(x(i, j) - row_max);
            total += out(i, j);
        }
        for (std::size_t j = 0; j < x.cols; ++j) {
            out(i, j) /= total;
        }
    }
    Matrix y = out;
    return a.tape().record("softmax_rows", std::move(out), {a}, [a, y](Tape& t, const Matrix& g) {
        Matrix ga(g.rows, g.cols);
        for (std::size_t i = 0; i < g.rows; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < g.cols; ++j) {
                dot += g(i, j) * y(i, j);
            }
            for (std::size_t j = 0; j < g.cols; ++j) {
                ga(i, j) = y(i, j) * (g(i, j) - dot);
            }
        }
        t.accumulate(a, ga);
    });
}

Var concat_cols(Var a, Var b)
{
    same_tape(a, b, "concat_cols");
    const Matrix& av = a.value();
    const Matrix& bv = b.value();
    require(av.rows == bv.rows, "concat_cols", "row counts differ");
    Matrix out(av.rows, av.cols + bv.cols);
    for (std::size_t i = 0; i < av.rows; ++i) {
        for (std::size_t j = 0; j < av.cols; ++j) {
            out(i, j) = av(i, j);
        }
        for (std::size_t j = 0; j < bv.cols; ++j) {
            out(i, av.cols + j) = bv(i, j);
        }
    }
    const std::size_t split = av.cols;
    return a.tape().record("concat_cols", std::move(out), {a, b}, [a, b, split](Tape& t, const Matrix& g) {
        Matrix ga(g.rows, split);
        Matrix gb(g.rows, g.cols - split);
        for (std::size_t i = 0; i < g.rows; ++i) {
            for (std::size_t j = 0; j < g.cols; ++j) {
                if (j < split) {
                    ga(i, j) = g(i, j);
                } else {
                    gb(i, j - split) = g(i, j);
                }
            }
        }
        t.accumulate(a, ga);
        t.accumulate(b, gb);
    });
}

Var gather_rows(Var a, std::span<const std::size_t> rows)
{
    const Matrix& x = a.value();
    Matrix out(rows.size(), x.cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        require(rows[r] < x.rows, "gather_rows", "row index out of range");
        for (std::size_t j = 0; j < x.cols; ++j) {
            out(r, j) = x(rows[r], j);
        }
    }
    std::vector<std::size_t> index(rows.begin(), rows.end());
    return a.tape().record("gather_rows", std::move(out), {a}, [a, index](Tape& t, const Matrix& g) {
        Matrix ga(a.rows(), a.cols());
        for (std::size_t r = 0; r < index.size(); ++r) {
            for (std::size_t j = 0; j < g.cols; ++j) {
                ga(index[r], j) += g(r, j);
            }
        }
        t.accumulate(a, ga);
    });
}

Var max_pool_groups(Var a, const NeighborGroups& groups)
{
    const Matrix& x = a.value();
    Matrix out(groups.size(), x.cols);
    // argmax[g * cols + j] = source row of the winning member
    std::vector<std::size_t> argmax(groups.size() * x.cols);
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const auto& members = groups[gi];
        require(!members.empty(), "max_pool_groups", "empty group");
        for (std::size_t m : members) {
            require(m < x.rows, "max_pool_groups", "member index out of range");
        }
        for (std::size_t j = 0; j < x.cols; ++j) {
            std::size_t best = members.front();
            for (std::size_t m : members) {
                if (x(m, j) > x(best, j) || (x(m, j) == x(best, j) && m < best)) {
                    best = m;
                }
            }
            out(gi, j) = x(best, j);
            argmax[gi * x.cols + j] = best;
        }
    }
    return a.tape().record("max_pool_groups", std::move(out), {a}, [a, argmax](Tape& t, const Matrix& g) {
        Matrix ga(a.rows(), a.cols());
        for (std::size_t gi = 0; gi < g.rows; ++gi) {
            for (std::size_t j = 0; j < g.cols; ++j) {
                ga(argmax[gi * g.cols + j], j) += g(gi, j);
            }
        }
        t.accumulate(a, ga);
    });
}

Var mean(Var a)
{
    const Matrix& x = a.value();
    require(x.size() > 0, "mean", "empty input");
    double total = 0.0;
    for (double v : x.data) {
        total += v;
    }
    const double n = static_cast<double>(x.size());
    return a.tape().record("mean", Matrix(1, 1, total / n), {a}, [a, n](Tape& t, const Matrix& g) {
        t.accumulate(a, Matrix(a.rows(), a.cols(), g.data[0] / n));
    });
}

Var l2_norm_rows(Var a)
{
    const Matrix& x = a.value();
    Matrix out(x.rows, 1);
    for (std::size_t i = 0; i < x.rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < x.cols; ++j) {
            s += x(i, j) * x(i, j);
        }
        out(i, 0) = std::sqrt(s);
    }
    Matrix norms = out;
    return a.tape().record("l2_norm_rows", std::move(out), {a}, [a, norms](Tape& t, const Matrix& g) {
        const Matrix& xv = a.value();
        Matrix ga(xv.rows, xv.cols);
        for (std::size_t i = 0; i < xv.rows; ++i) {
            if (norms(i, 0) == 0.0) {
                continue;
            }
            for (std::size_t j = 0; j < xv.cols; ++j) {
                ga(i, j) = g(i, 0) * xv(i, j) / norms(i, 0);
            }
        }
        t.accumulate(a, ga);
    });
}

double relative_error(double analytic, double numeric, double floor)
{
    const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
    return std::abs(analytic - numeric) / denom;
}

GradCheckReport grad_check(const ScalarBuilder& f, std::span<const NamedMatrix> params,
                           const GradCheckOptions& options)
{
    if (!(options.eps > 0.0)) {
        throw InvalidArgument("grad_check: eps must be positive");
    }

    std::vector<Matrix> values;
    values.reserve(params.size());
    for (const auto& p : params) {
        values.push_back(p.value);
    }

    auto evaluate = [&](bool with_backward, std::vector<Matrix>* grads) {
        Tape tape;
        std::vector<Var> leaves;
        leaves.reserve(values.size());
        for (const auto& v : values) {
            leaves.push_back(tape.parameter(v));
        }
        Var out = f(tape, leaves);
        if (out.value().size() != 1) {
            throw InvalidArgument("grad_check: builder must return a 1x1 node");
        }
        const double result = out.value().data[0];
        if (!std::isfinite(result)) {
            throw NumericError("grad_check: non-finite objective");
        }
        if (with_backward) {
            tape.backward(out);
            for (const Var& leaf : leaves) {
                grads->push_back(leaf.grad());
            }
        }
        return result;
    };

    std::vector<Matrix> analytic;
    evaluate(true, &analytic);

    GradCheckReport report;
    for (std::size_t p = 0; p < values.size(); ++p) {
        GradCheckEntry entry{params[p].name, 0.0, 0.0};
        for (std::size_t i = 0; i < values[p].data.size(); ++i) {
            const double original = values[p].data[i];
            values[p].data[i] = original + options.eps;
            const double plus = evaluate(false, nullptr);
            values[p].data[i] = original - options.eps;
            const double minus = evaluate(false, nullptr);
            values[p].data[i] = original;

            const double numeric = (plus - minus) / (2.0 * options.eps);
            const double a = analytic[p].data[i];
            entry.max_abs_error = std::max(entry.max_abs_error, std::abs(a - numeric));
            entry.max_rel_error =
                std::max(entry.max_rel_error, relative_error(a, numeric, options.denominator_floor));
            ++report.coordinates;
        }
        report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
        report.entries.push_back(std::move(entry));
    }
    report.passed = report.max_rel_error <= options.tol;
    return report;
}

} // namespace spatial3d::ad

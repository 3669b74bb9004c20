#include "sqf/diff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sqf/core/error.hpp"

namespace sqf::diff {

namespace {

std::span<double> parent_grad(Node &self, std::size_t i) {
	auto &p = *self.parents[i];
	if (!p.requires_grad) {
		return {};
	}
	return p.ensureGrad();
}

[[noreturn]] void shape_error(const char *op, const Shape &a, const Shape &b) {
	throw ShapeError(std::string(op) + ": incompatible shapes " + to_string(a) + " and " + to_string(b));
}

/// Right-aligned broadcast of two shapes with per-output-dim input strides (0 when broadcast).
struct BroadcastPlan {
	Shape out;
	std::vector<std::size_t> stride_a;
	std::vector<std::size_t> stride_b;
	std::size_t size_a = 0;
	std::size_t size_b = 0;
	/// a has the output shape and b equals its trailing dimensions, so ib = o mod size_b.
	bool b_suffix = false;
};

std::vector<std::size_t> contiguous_strides(const Shape &shape) {
	std::vector<std::size_t> s(shape.size(), 1);
	for (std::size_t d = shape.size(); d-- > 1;) {
		s[d - 1] = s[d] * shape[d];
	}
	return s;
}

BroadcastPlan plan_broadcast(const char *op, const Shape &a, const Shape &b) {
	BroadcastPlan plan;
	const std::size_t rank = std::max(a.size(), b.size());
	plan.out.assign(rank, 1);
	plan.stride_a.assign(rank, 0);
	plan.stride_b.assign(rank, 0);
	const auto sa = contiguous_strides(a);
	const auto sb = contiguous_strides(b);
	for (std::size_t i = 0; i < rank; ++i) {
		const std::size_t d = rank - 1 - i;
		const std::size_t da = i < a.size() ? a[a.size() - 1 - i] : 1;
		const std::size_t db = i < b.size() ? b[b.size() - 1 - i] : 1;
		if (da != db && da != 1 && db != 1) {
			shape_error(op, a, b);
		}
		plan.out[d] = std::max(da, db);
		if (da != 1) {
			plan.stride_a[d] = sa[a.size() - 1 - i];
		}
		if (db != 1) {
			plan.stride_b[d] = sb[b.size() - 1 - i];
		}
	}
	plan.size_a = element_count(a);
	plan.size_b = element_count(b);
	plan.b_suffix = a == plan.out && plan.size_b > 0;
	for (std::size_t i = 0; plan.b_suffix && i < b.size(); ++i) {
		plan.b_suffix = b[i] == plan.out[rank - b.size() + i];
	}
	return plan;
}

template <typename Fn>
void for_each_broadcast(const BroadcastPlan &plan, Fn &&fn) {
	const std::size_t n = element_count(plan.out);
	if (plan.size_a == n && plan.size_b == n) {
		for (std::size_t o = 0; o < n; ++o) {
			fn(o, o, o);
		}
		return;
	}
	if (plan.b_suffix) {
		for (std::size_t o = 0, ib = 0; o < n; ++o) {
			fn(o, o, ib);
			if (++ib == plan.size_b) {
				ib = 0;
			}
		}
		return;
	}
	const std::size_t rank = plan.out.size();
	std::vector<std::size_t> idx(rank, 0);
	std::size_t ia = 0;
	std::size_t ib = 0;
	for (std::size_t o = 0; o < n; ++o) {
		fn(o, ia, ib);
		for (std::size_t d = rank; d-- > 0;) {
			++idx[d];
			ia += plan.stride_a[d];
			ib += plan.stride_b[d];
			if (idx[d] < plan.out[d]) {
				break;
			}
			ia -= plan.stride_a[d] * plan.out[d];
			ib -= plan.stride_b[d] * plan.out[d];
			idx[d] = 0;
		}
	}
}

enum class Binary { add, sub, mul };

Tensor binary_op(const Tensor &a, const Tensor &b, Binary kind) {
	const char *name = kind == Binary::add ? "add" : kind == Binary::sub ? "sub" : "mul";
	auto plan = plan_broadcast(name, a.shape(), b.shape());
	std::vector<double> out(element_count(plan.out));
	const auto va = a.values();
	const auto vb = b.values();
	for_each_broadcast(plan, [&](std::size_t o, std::size_t ia, std::size_t ib) {
		switch (kind) {
		case Binary::add:
			out[o] = va[ia] + vb[ib];
			break;
		case Binary::sub:
			out[o] = va[ia] - vb[ib];
			break;
		case Binary::mul:
			out[o] = va[ia] * vb[ib];
			break;
		}
	});
	Shape shape = plan.out;
	return make_result(std::move(shape), std::move(out), {a, b}, name, [plan, kind](Node &self) {
		auto ga = parent_grad(self, 0);
		auto gb = parent_grad(self, 1);
		const auto &va = self.parents[0]->value;
		const auto &vb = self.parents[1]->value;
		const auto &g = self.grad;
		for_each_broadcast(plan, [&](std::size_t o, std::size_t ia, std::size_t ib) {
			const double go = g[o];
			switch (kind) {
			case Binary::add:
				if (!ga.empty()) ga[ia] += go;
				if (!gb.empty()) gb[ib] += go;
				break;
			case Binary::sub:
				if (!ga.empty()) ga[ia] += go;
				if (!gb.empty()) gb[ib] -= go;
				break;
			case Binary::mul:
				if (!ga.empty()) ga[ia] += go * vb[ib];
				if (!gb.empty()) gb[ib] += go * va[ia];
				break;
			}
		});
	});
}

struct AxisSplit {
	std::size_t outer = 1;
	std::size_t n = 1;
	std::size_t inner = 1;
};

AxisSplit split_axis(const Shape &shape, std::size_t axis) {
	AxisSplit s;
	for (std::size_t d = 0; d < axis; ++d) {
		s.outer *= shape[d];
	}
	s.n = shape[axis];
	for (std::size_t d = axis + 1; d < shape.size(); ++d) {
		s.inner *= shape[d];
	}
	return s;
}

void check_axis(const char *op, const Tensor &x, std::size_t axis) {
	if (axis >= x.rank()) {
		throw ShapeError(std::string(op) + ": axis " + std::to_string(axis) + " out of range for shape " +
		                 to_string(x.shape()));
	}
}

} // namespace

Tensor matmul(const Tensor &a, const Tensor &b) {
	if (a.rank() < 2 || b.rank() < 2) {
		shape_error("matmul", a.shape(), b.shape());
	}
	const auto &sa = a.shape();
	const auto &sb = b.shape();
	const std::size_t m = sa[sa.size() - 2];
	const std::size_t k = sa.back();
	const bool batched_b = b.rank() > 2;
	if (batched_b && (b.rank() != a.rank() || !std::equal(sa.begin(), sa.end() - 2, sb.begin()))) {
		shape_error("matmul", sa, sb);
	}
	if (sb[sb.size() - 2] != k) {
		shape_error("matmul", sa, sb);
	}
	const std::size_t n = sb.back();
	const std::size_t batch = a.numel() / std::max<std::size_t>(m * k, 1);
	Shape out_shape(sa.begin(), sa.end() - 1);
	out_shape.push_back(n);

	std::vector<double> out(batch * m * n, 0.0);
	const double *pa = a.values().data();
	const double *pb = b.values().data();
	for (std::size_t t = 0; t < batch; ++t) {
		const double *A = pa + t * m * k;
		const double *B = pb + (batched_b ? t * k * n : 0);
		double *C = out.data() + t * m * n;
		for (std::size_t i = 0; i < m; ++i) {
			for (std::size_t kk = 0; kk < k; ++kk) {
				const double av = A[i * k + kk];
				const double *brow = B + kk * n;
				double *crow = C + i * n;
				for (std::size_t j = 0; j < n; ++j) {
					crow[j] += av * brow[j];
				}
			}
		}
	}
	return make_result(std::move(out_shape), std::move(out), {a, b}, "matmul",
	                   [batch, m, k, n, batched_b](Node &self) {
		                   auto ga = parent_grad(self, 0);
		                   auto gb = parent_grad(self, 1);
		                   const double *pa = self.parents[0]->value.data();
		                   const double *pb = self.parents[1]->value.data();
		                   const double *g = self.grad.data();
		                   for (std::size_t t = 0; t < batch; ++t) {
			                   const double *A = pa + t * m * k;
			                   const double *B = pb + (batched_b ? t * k * n : 0);
			                   const double *G = g + t * m * n;
			                   if (!ga.empty()) {
				                   double *GA = ga.data() + t * m * k;
				                   for (std::size_t i = 0; i < m; ++i) {
					                   for (std::size_t kk = 0; kk < k; ++kk) {
						                   const double *brow = B + kk * n;
						                   const double *grow = G + i * n;
						                   double acc = 0.0;
						                   for (std::size_t j = 0; j < n; ++j) {
							                   acc += grow[j] * brow[j];
						                   }
						                   GA[i * k + kk] += acc;
					                   }
				                   }
			                   }
			                   if (!gb.empty()) {
				                   double *GB = gb.data() + (batched_b ? t * k * n : 0);
				                   for (std::size_t i = 0; i < m; ++i) {
					                   const double *grow = G + i * n;
					                   for (std::size_t kk = 0; kk < k; ++kk) {
						                   const double av = A[i * k + kk];
						                   double *gbrow = GB + kk * n;
						                   for (std::size_t j = 0; j < n; ++j) {
							                   gbrow[j] += av * grow[j];
						                   }
					                   }
				                   }
			                   }
		                   }
	                   });
}

Tensor add(const Tensor &a, const Tensor &b) { return binary_op(a, b, Binary::add); }
Tensor sub(const Tensor &a, const Tensor &b) { return binary_op(a, b, Binary::sub); }
Tensor mul(const Tensor &a, const Tensor &b) { return binary_op(a, b, Binary::mul); }

Tensor scale(const Tensor &x, double factor) {
	std::vector<double> out(x.values().begin(), x.values().end());
	for (auto &v : out) {
		v *= factor;
	}
	return make_result(x.shape(), std::move(out), {x}, "scale", [factor](Node &self) {
		auto gx = parent_grad(self, 0);
		for (std::size_t i = 0; i < gx.size(); ++i) {
			gx[i] += factor * self.grad[i];
		}
	});
}

Tensor relu(const Tensor &x) {
	std::vector<double> out(x.values().begin(), x.values().end());
	for (auto &v : out) {
		v = v > 0.0 ? v : 0.0;
	}
	return make_result(x.shape(), std::move(out), {x}, "relu", [](Node &self) {
		auto gx = parent_grad(self, 0);
		const auto &in = self.parents[0]->value;
		for (std::size_t i = 0; i < gx.size(); ++i) {
			if (in[i] > 0.0) {
				gx[i] += self.grad[i];
			}
		}
	});
}

Tensor softmax(const Tensor &x) {
	if (x.rank() == 0) {
		throw ShapeError("softmax on a scalar");
	}
	const std::size_t d = x.shape().back();
	const std::size_t rows = d == 0 ? 0 : x.numel() / d;
	std::vector<double> out(x.numel());
	const auto in = x.values();
	for (std::size_t r = 0; r < rows; ++r) {
		const double *row = in.data() + r * d;
		double *y = out.data() + r * d;
		const double mx = *std::max_element(row, row + d);
		double total = 0.0;
		for (std::size_t j = 0; j < d; ++j) {
			y[j] = std::exp(row[j] - mx);
			total += y[j];
		}
		for (std::size_t j = 0; j < d; ++j) {
			y[j] /= total;
		}
	}
	return make_result(x.shape(), std::move(out), {x}, "softmax", [rows, d](Node &self) {
		auto gx = parent_grad(self, 0);
		for (std::size_t r = 0; r < rows; ++r) {
			const double *y = self.value.data() + r * d;
			const double *g = self.grad.data() + r * d;
			double dot = 0.0;
			for (std::size_t j = 0; j < d; ++j) {
				dot += g[j] * y[j];
			}
			for (std::size_t j = 0; j < d; ++j) {
				gx[r * d + j] += y[j] * (g[j] - dot);
			}
		}
	});
}

Tensor layer_norm(const Tensor &x, const Tensor &gamma, const Tensor &beta, double eps) {
	if (x.rank() == 0) {
		throw ShapeError("layer_norm on a scalar");
	}
	const std::size_t d = x.shape().back();
	if (gamma.defined() && gamma.shape() != Shape{d}) {
		shape_error("layer_norm", x.shape(), gamma.shape());
	}
	if (beta.defined() && beta.shape() != Shape{d}) {
		shape_error("layer_norm", x.shape(), beta.shape());
	}
	const std::size_t rows = d == 0 ? 0 : x.numel() / d;
	const auto in = x.values();
	std::vector<double> xhat(x.numel());
	std::vector<double> rstd(rows);
	std::vector<double> out(x.numel());
	for (std::size_t r = 0; r < rows; ++r) {
		const double *row = in.data() + r * d;
		double mean = 0.0;
		for (std::size_t j = 0; j < d; ++j) {
			mean += row[j];
		}
		mean /= static_cast<double>(d);
		double var = 0.0;
		for (std::size_t j = 0; j < d; ++j) {
			var += (row[j] - mean) * (row[j] - mean);
		}
		var /= static_cast<double>(d);
		rstd[r] = 1.0 / std::sqrt(var + eps);
		for (std::size_t j = 0; j < d; ++j) {
			const double xh = (row[j] - mean) * rstd[r];
			xhat[r * d + j] = xh;
			const double gm = gamma.defined() ? gamma.at(j) : 1.0;
			const double bt = beta.defined() ? beta.at(j) : 0.0;
			out[r * d + j] = xh * gm + bt;
		}
	}
	std::vector<Tensor> parents{x};
	const bool has_gamma = gamma.defined();
	const bool has_beta = beta.defined();
	if (has_gamma) {
		parents.push_back(gamma);
	}
	if (has_beta) {
		parents.push_back(beta);
	}
	return make_result(x.shape(), std::move(out), parents, "layer_norm",
	                   [rows, d, xhat = std::move(xhat), rstd = std::move(rstd), has_gamma, has_beta](Node &self) {
		                   auto gx = parent_grad(self, 0);
		                   std::span<double> ggamma = has_gamma ? parent_grad(self, 1) : std::span<double>{};
		                   std::span<double> gbeta = has_beta ? parent_grad(self, has_gamma ? 2 : 1) : std::span<double>{};
		                   const double *gm = has_gamma ? self.parents[1]->value.data() : nullptr;
		                   std::vector<double> dxhat(d);
		                   for (std::size_t r = 0; r < rows; ++r) {
			                   const double *g = self.grad.data() + r * d;
			                   const double *xh = xhat.data() + r * d;
			                   double mean_dxhat = 0.0;
			                   double mean_dxhat_xhat = 0.0;
			                   for (std::size_t j = 0; j < d; ++j) {
				                   dxhat[j] = g[j] * (gm ? gm[j] : 1.0);
				                   mean_dxhat += dxhat[j];
				                   mean_dxhat_xhat += dxhat[j] * xh[j];
				                   if (!ggamma.empty()) ggamma[j] += g[j] * xh[j];
				                   if (!gbeta.empty()) gbeta[j] += g[j];
			                   }
			                   if (gx.empty()) {
				                   continue;
			                   }
			                   mean_dxhat /= static_cast<double>(d);
			                   mean_dxhat_xhat /= static_cast<double>(d);
			                   for (std::size_t j = 0; j < d; ++j) {
				                   gx[r * d + j] += rstd[r] * (dxhat[j] - mean_dxhat - xh[j] * mean_dxhat_xhat);
			                   }
		                   }
	                   });
}

Tensor dropout(const Tensor &x, double p, std::uint64_t seed, bool training) {
	if (!training || p == 0.0) {
		return x;
	}
	if (!(p > 0.0 && p < 1.0)) {
		throw std::invalid_argument("dropout probability must lie in [0, 1)");
	}
	const double keep = 1.0 - p;
	std::mt19937_64 rng(seed);
	std::bernoulli_distribution keep_draw(keep);
	std::vector<double> factor(x.numel());
	std::vector<double> out(x.numel());
	const auto in = x.values();
	for (std::size_t i = 0; i < factor.size(); ++i) {
		factor[i] = keep_draw(rng) ? 1.0 / keep : 0.0;
		out[i] = in[i] * factor[i];
	}
	return make_result(x.shape(), std::move(out), {x}, "dropout", [factor = std::move(factor)](Node &self) {
		auto gx = parent_grad(self, 0);
		for (std::size_t i = 0; i < gx.size(); ++i) {
			gx[i] += self.grad[i] * factor[i];
		}
	});
}

Tensor concat(const std::vector<Tensor> &parts, std::size_t axis) {
	if (parts.empty()) {
		throw ShapeError("concat of zero tensors");
	}
	check_axis("concat", parts[0], axis);
	Shape shape = parts[0].shape();
	std::size_t total = 0;
	for (const auto &p : parts) {
		if (p.rank() != shape.size()) {
			shape_error("concat", shape, p.shape());
		}
		for (std::size_t d = 0; d < shape.size(); ++d) {
			if (d != axis && p.shape()[d] != shape[d]) {
				shape_error("concat", shape, p.shape());
			}
		}
		total += p.shape()[axis];
	}
	shape[axis] = total;
	const auto split = split_axis(shape, axis);
	std::vector<double> out(element_count(shape));
	std::vector<std::size_t> offsets;
	std::size_t offset = 0;
	for (const auto &p : parts) {
		offsets.push_back(offset);
		const std::size_t n = p.shape()[axis];
		const auto in = p.values();
		for (std::size_t o = 0; o < split.outer; ++o) {
			std::copy_n(in.data() + o * n * split.inner, n * split.inner,
			            out.data() + (o * total + offset) * split.inner);
		}
		offset += n;
	}
	std::vector<std::size_t> sizes;
	for (const auto &p : parts) {
		sizes.push_back(p.shape()[axis]);
	}
	return make_result(shape, std::move(out), parts, "concat", [split, total, offsets, sizes](Node &self) {
		for (std::size_t i = 0; i < sizes.size(); ++i) {
			auto gp = parent_grad(self, i);
			if (gp.empty()) {
				continue;
			}
			const std::size_t n = sizes[i];
			for (std::size_t o = 0; o < split.outer; ++o) {
				const double *src = self.grad.data() + (o * total + offsets[i]) * split.inner;
				double *dst = gp.data() + o * n * split.inner;
				for (std::size_t j = 0; j < n * split.inner; ++j) {
					dst[j] += src[j];
				}
			}
		}
	});
}

Tensor sum(const Tensor &x, std::size_t axis) {
	check_axis("sum", x, axis);
	const auto split = split_axis(x.shape(), axis);
	Shape shape = x.shape();
	shape.erase(shape.begin() + static_cast<std::ptrdiff_t>(axis));
	std::vector<double> out(split.outer * split.inner, 0.0);
	const auto in = x.values();
	for (std::size_t o = 0; o < split.outer; ++o) {
		for (std::size_t i = 0; i < split.n; ++i) {
			for (std::size_t j = 0; j < split.inner; ++j) {
				out[o * split.inner + j] += in[(o * split.n + i) * split.inner + j];
			}
		}
	}
	return make_result(std::move(shape), std::move(out), {x}, "sum", [split](Node &self) {
		auto gx = parent_grad(self, 0);
		for (std::size_t o = 0; o < split.outer; ++o) {
			for (std::size_t i = 0; i < split.n; ++i) {
				for (std::size_t j = 0; j < split.inner; ++j) {
					gx[(o * split.n + i) * split.inner + j] += self.grad[o * split.inner + j];
				}
			}
		}
	});
}

Tensor mean(const Tensor &x, std::size_t axis) {
	check_axis("mean", x, axis);
	const std::size_t n = x.shape()[axis];
	if (n == 0) {
		throw ShapeError("mean over an empty axis");
	}
	return scale(sum(x, axis), 1.0 / static_cast<double>(n));
}

Tensor sum_all(const Tensor &x) {
	double total = 0.0;
	for (double v : x.values()) {
		total += v;
	}
	return make_result({}, {total}, {x}, "sum_all", [](Node &self) {
		auto gx = parent_grad(self, 0);
		const double g = self.grad[0];
		for (auto &v : gx) {
			v += g;
		}
	});
}

Tensor gather(const Tensor &x, std::size_t axis, std::span<const std::size_t> indices, std::size_t k) {
	check_axis("gather", x, axis);
	const auto split = split_axis(x.shape(), axis);
	if (indices.size() != split.outer * k) {
		throw ShapeError("gather: expected " + std::to_string(split.outer * k) + " indices for shape " +
		                 to_string(x.shape()) + ", got " + std::to_string(indices.size()));
	}
	for (auto idx : indices) {
		if (idx >= split.n) {
			throw ShapeError("gather: index " + std::to_string(idx) + " out of range for axis of length " +
			                 std::to_string(split.n) + " in shape " + to_string(x.shape()));
		}
	}
	Shape shape = x.shape();
	shape[axis] = k;
	std::vector<double> out(split.outer * k * split.inner);
	const auto in = x.values();
	for (std::size_t o = 0; o < split.outer; ++o) {
		for (std::size_t t = 0; t < k; ++t) {
			const std::size_t src = (o * split.n + indices[o * k + t]) * split.inner;
			std::copy_n(in.data() + src, split.inner, out.data() + (o * k + t) * split.inner);
		}
	}
	std::vector<std::size_t> idx(indices.begin(), indices.end());
	return make_result(std::move(shape), std::move(out), {x}, "gather", [split, k, idx = std::move(idx)](Node &self) {
		auto gx = parent_grad(self, 0);
		for (std::size_t o = 0; o < split.outer; ++o) {
			for (std::size_t t = 0; t < k; ++t) {
				const std::size_t dst = (o * split.n + idx[o * k + t]) * split.inner;
				const double *g = self.grad.data() + (o * k + t) * split.inner;
				for (std::size_t j = 0; j < split.inner; ++j) {
					gx[dst + j] += g[j];
				}
			}
		}
	});
}

Tensor masked_fill(const Tensor &x, std::span<const std::uint8_t> mask, double value) {
	if (mask.size() != x.numel()) {
		throw ShapeError("masked_fill: mask of " + std::to_string(mask.size()) + " entries for shape " +
		                 to_string(x.shape()));
	}
	std::vector<double> out(x.values().begin(), x.values().end());
	for (std::size_t i = 0; i < out.size(); ++i) {
		if (mask[i]) {
			out[i] = value;
		}
	}
	std::vector<std::uint8_t> m(mask.begin(), mask.end());
	return make_result(x.shape(), std::move(out), {x}, "masked_fill", [m = std::move(m)](Node &self) {
		auto gx = parent_grad(self, 0);
		for (std::size_t i = 0; i < gx.size(); ++i) {
			if (!m[i]) {
				gx[i] += self.grad[i];
			}
		}
	});
}

Tensor reshape(const Tensor &x, Shape shape) {
	if (element_count(shape) != x.numel()) {
		shape_error("reshape", x.shape(), shape);
	}
	std::vector<double> out(x.values().begin(), x.values().end());
	return make_result(std::move(shape), std::move(out), {x}, "reshape", [](Node &self) {
		auto gx = parent_grad(self, 0);
		for (std::size_t i = 0; i < gx.size(); ++i) {
			gx[i] += self.grad[i];
		}
	});
}

Tensor permute(const Tensor &x, const std::vector<std::size_t> &axes) {
	const std::size_t rank = x.rank();
	if (axes.size() != rank) {
		throw ShapeError("permute: " + std::to_string(axes.size()) + " axes for shape " + to_string(x.shape()));
	}
	std::vector<bool> seen(rank, false);
	for (auto a : axes) {
		if (a >= rank || seen[a]) {
			throw ShapeError("permute: invalid axis order for shape " + to_string(x.shape()));
		}
		seen[a] = true;
	}
	const auto in_strides = contiguous_strides(x.shape());
	Shape shape(rank);
	std::vector<std::size_t> strides(rank);
	for (std::size_t d = 0; d < rank; ++d) {
		shape[d] = x.shape()[axes[d]];
		strides[d] = in_strides[axes[d]];
	}
	const std::size_t n = x.numel();
	// source offset for every output element
	std::vector<std::size_t> source(n);
	std::vector<std::size_t> idx(rank, 0);
	std::size_t off = 0;
	for (std::size_t o = 0; o < n; ++o) {
		source[o] = off;
		for (std::size_t d = rank; d-- > 0;) {
			++idx[d];
			off += strides[d];
			if (idx[d] < shape[d]) {
				break;
			}
			off -= strides[d] * shape[d];
			idx[d] = 0;
		}
	}
	std::vector<double> out(n);
	const auto in = x.values();
	for (std::size_t o = 0; o < n; ++o) {
		out[o] = in[source[o]];
	}
	return make_result(std::move(shape), std::move(out), {x}, "permute", [source = std::move(source)](Node &self) {
		auto gx = parent_grad(self, 0);
		for (std::size_t o = 0; o < source.size(); ++o) {
			gx[source[o]] += self.grad[o];
		}
	});
}

Tensor transpose(const Tensor &x) {
	if (x.rank() < 2) {
		throw ShapeError("transpose needs rank >= 2, got " + to_string(x.shape()));
	}
	std::vector<std::size_t> axes(x.rank());
	for (std::size_t d = 0; d < axes.size(); ++d) {
		axes[d] = d;
	}
	std::swap(axes[axes.size() - 1], axes[axes.size() - 2]);
	return permute(x, axes);
}

Tensor broadcast_to(const Tensor &x, const Shape &shape) {
	auto plan = plan_broadcast("broadcast_to", shape, x.shape());
	if (plan.out != shape) {
		shape_error("broadcast_to", x.shape(), shape);
	}
	std::vector<double> out(element_count(shape));
	const auto in = x.values();
	for_each_broadcast(plan, [&](std::size_t o, std::size_t, std::size_t ib) { out[o] = in[ib]; });
	return make_result(shape, std::move(out), {x}, "broadcast_to", [plan](Node &self) {
		auto gx = parent_grad(self, 0);
		for_each_broadcast(plan, [&](std::size_t o, std::size_t, std::size_t ib) { gx[ib] += self.grad[o]; });
	});
}

} // namespace sqf::diff

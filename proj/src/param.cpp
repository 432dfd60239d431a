#include "feedtune/param.hpp"

#include <cmath>
#include <cstring>

namespace feedtune {

ParameterVector::ParameterVector(std::vector<double> values) : values_(std::move(values)) {
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw std::invalid_argument("non-finite parameter at index " + std::to_string(i));
        }
    }
}

ParameterVector ParameterVector::zeros(std::size_t dim) {
    return ParameterVector(std::vector<double>(dim, 0.0));
}

ParameterVector axpy(const ParameterVector& dst, double scale, const ParameterVector& src) {
    if (dst.size() != src.size()) {
        throw dimension_mismatch_error("axpy: dimension mismatch (" + std::to_string(dst.size()) +
                                       " vs " + std::to_string(src.size()) + ")");
    }
    if (!std::isfinite(scale)) {
        throw std::invalid_argument("axpy: non-finite scale");
    }
    std::vector<double> out(dst.size());
    const double* a = dst.data();
    const double* b = src.data();
#pragma omp parallel for if (out.size() > 4096)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(out.size()); ++i) {
        out[static_cast<std::size_t>(i)] =
            a[static_cast<std::size_t>(i)] + scale * b[static_cast<std::size_t>(i)];
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!std::isfinite(out[i])) {
            throw std::invalid_argument("axpy: non-finite result at index " + std::to_string(i));
        }
    }
    return ParameterVector(std::move(out));
}

double dot(const ParameterVector& a, const ParameterVector& b) {
    if (a.size() != b.size()) {
        throw dimension_mismatch_error("dot: dimension mismatch");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(const ParameterVector& v) {
    return std::sqrt(dot(v, v));
}

std::uint64_t param_digest(const ParameterVector& v) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::uint64_t bits;
        double x = v[i];
        std::memcpy(&bits, &x, sizeof bits);
        for (int byte = 0; byte < 8; ++byte) {
            h ^= (bits >> (8 * byte)) & 0xffU;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

LayerPartition::LayerPartition(std::vector<LayerSegment> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) {
        throw std::invalid_argument("partition needs at least one layer");
    }
    std::size_t expect = 0;
    for (const auto& seg : layers_) {
        if (seg.length == 0) {
            throw std::invalid_argument("partition segment '" + seg.name + "' is empty");
        }
        if (seg.offset != expect) {
            throw std::invalid_argument("partition segments must be contiguous from 0");
        }
        expect += seg.length;
    }
    total_dim_ = expect;
}

LayerPartition LayerPartition::trivial(std::size_t dim) {
    return LayerPartition({LayerSegment{"all", 0, dim}});
}

const LayerSegment& LayerPartition::segment(std::size_t h) const {
    if (h < 1 || h > layers_.size()) {
        throw std::out_of_range("layer index " + std::to_string(h) + " outside 1.." +
                                std::to_string(layers_.size()));
    }
    return layers_[h - 1];
}

ParameterVector layer_view(const ParameterVector& theta, const LayerPartition& partition,
                           std::size_t h) {
    if (partition.total_dim() != theta.size()) {
        throw dimension_mismatch_error("layer_view: partition does not cover this vector");
    }
    const LayerSegment& seg = partition.segment(h);
    std::vector<double> out(theta.values().begin() + static_cast<std::ptrdiff_t>(seg.offset),
                            theta.values().begin() +
                                static_cast<std::ptrdiff_t>(seg.offset + seg.length));
    return ParameterVector(std::move(out));
}

void write_layer(ParameterVector& theta, const LayerPartition& partition, std::size_t h,
                 const ParameterVector& segment_values) {
    if (partition.total_dim() != theta.size()) {
        throw dimension_mismatch_error("write_layer: partition does not cover this vector");
    }
    const LayerSegment& seg = partition.segment(h);
    if (segment_values.size() != seg.length) {
        throw dimension_mismatch_error("write_layer: segment length mismatch");
    }
    for (std::size_t i = 0; i < seg.length; ++i) {
        theta[seg.offset + i] = segment_values[i];
    }
}

} // namespace feedtune

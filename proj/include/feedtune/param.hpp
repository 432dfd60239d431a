#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "feedtune/errors.hpp"

namespace feedtune {

/// Flat tuned-parameter state. Dimension is fixed at construction and every
/// arithmetic result is checked finite, since the optimizers depend on
/// small directional differences that NaN/Inf would silently destroy.
class ParameterVector {
public:
    ParameterVector() = default;
    explicit ParameterVector(std::vector<double> values);

    static ParameterVector zeros(std::size_t dim);

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }
    const std::vector<double>& values() const { return values_; }
    const double* data() const { return values_.data(); }
    double* data() { return values_.data(); }

    bool operator==(const ParameterVector& other) const = default;

private:
    std::vector<double> values_;
};

/// dst + scale * src, elementwise. Inputs are not modified.
ParameterVector axpy(const ParameterVector& dst, double scale, const ParameterVector& src);

double dot(const ParameterVector& a, const ParameterVector& b);
double norm(const ParameterVector& v);

/// 64-bit FNV-1a over the raw value bytes; used as a candidate/iterate id.
std::uint64_t param_digest(const ParameterVector& v);

struct LayerSegment {
    std::string name;
    std::size_t offset = 0;
    std::size_t length = 0;
};

/// Metadata over one flat vector: contiguous, non-overlapping segments that
/// cover exactly [0, dim). Layers are addressed 1..H.
class LayerPartition {
public:
    LayerPartition() = default;
    explicit LayerPartition(std::vector<LayerSegment> layers);

    /// Single segment "all" spanning the whole vector.
    static LayerPartition trivial(std::size_t dim);

    std::size_t layer_count() const { return layers_.size(); }
    std::size_t total_dim() const { return total_dim_; }
    const LayerSegment& segment(std::size_t h) const; // h in 1..H
    const std::vector<LayerSegment>& segments() const { return layers_; }

private:
    std::vector<LayerSegment> layers_;
    std::size_t total_dim_ = 0;
};

/// Copy of segment h of `theta` (value semantics at the boundary).
ParameterVector layer_view(const ParameterVector& theta, const LayerPartition& partition,
                           std::size_t h);

/// Writes `segment_values` back into layer h; all other segments untouched.
void write_layer(ParameterVector& theta, const LayerPartition& partition, std::size_t h,
                 const ParameterVector& segment_values);

} // namespace feedtune

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace lcfed {

// A set of labeled examples, features stored row-major.
struct Examples {
    std::size_t feature_dim = 0;
    std::vector<double> features;
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }
    bool empty() const { return labels.empty(); }

    std::span<const double> row(std::size_t i) const {
        return {features.data() + i * feature_dim, feature_dim};
    }

    void push_back(std::span<const double> x, int label) {
        if (x.size() != feature_dim)
            throw std::invalid_argument("Examples::push_back: feature dim mismatch");
        features.insert(features.end(), x.begin(), x.end());
        labels.push_back(label);
    }

    Examples subset(std::span<const std::size_t> idx) const {
        Examples out;
        out.feature_dim = feature_dim;
        out.features.reserve(idx.size() * feature_dim);
        out.labels.reserve(idx.size());
        for (std::size_t i : idx) out.push_back(row(i), labels[i]);
        return out;
    }

    int num_classes() const {
        int c = 0;
        for (int y : labels)
            if (y + 1 > c) c = y + 1;
        return c;
    }
};

// One device's local data. true_cluster is set for synthetic tasks where
// the generating concept is known.
struct DeviceShard {
    int device_id = 0;
    Examples train;
    Examples test;
    std::optional<int> true_cluster;
};

} // namespace lcfed

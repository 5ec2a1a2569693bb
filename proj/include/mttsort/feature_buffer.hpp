#pragma once

#include <cstddef>
#include <deque>

#include "mttsort/core.hpp"
#include "mttsort/errors.hpp"

namespace mttsort {

/// FIFO of the most recent appearance embeddings of one track. Pushing onto a
/// full buffer evicts the oldest entry. The average-pooled, re-normalized
/// vector is the track's appearance descriptor for association.
class FeatureBuffer {
public:
    explicit FeatureBuffer(std::size_t capacity = 5) : capacity_(capacity) {
        if (capacity == 0) throw ConfigError("feature buffer capacity must be positive");
    }

    void push(const Embedding& feature) {
        if (!entries_.empty() && feature.size() != entries_.front().size()) {
            throw SchemaError("feature dimension " + std::to_string(feature.size()) +
                              " does not match buffer dimension " +
                              std::to_string(entries_.front().size()));
        }
        if (entries_.size() == capacity_) entries_.pop_front();
        entries_.push_back(feature);
    }

    void clear() { entries_.clear(); }

    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return entries_.empty(); }

    /// Oldest first.
    const std::deque<Embedding>& entries() const { return entries_; }
    const Embedding& newest() const { return entries_.back(); }

    /// Element-wise mean re-normalized to unit length. A mean that cancels to
    /// zero falls back to the newest entry.
    Embedding pooled() const {
        if (entries_.empty()) throw Error("pooled feature of an empty buffer");
        Embedding sum = Embedding::Zero(entries_.front().size());
        for (const auto& e : entries_) sum += e;
        Embedding mean = sum / static_cast<double>(entries_.size());
        const double n = mean.norm();
        if (!(n > 1e-12)) return entries_.back();
        return mean / n;
    }

private:
    std::size_t capacity_;
    std::deque<Embedding> entries_;
};

}  // namespace mttsort

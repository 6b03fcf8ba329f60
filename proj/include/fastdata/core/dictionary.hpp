#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fastdata/core/point.hpp"
#include "fastdata/error.hpp"

namespace fastdata {

/// Bijection between observed (attribute name, value) pairs and dense
/// integer ids starting at 0. Single writer; readers take a snapshot.
class AttributeDictionary {
 public:
  using Entry = std::pair<std::string, std::string>;

  explicit AttributeDictionary(
      std::size_t capacity = static_cast<std::size_t>(std::numeric_limits<AttributeId>::max()))
      : capacity_(capacity) {}

  AttributeId encode(std::string_view name, std::string_view value) {
    std::string key = make_key(name, value);
    if (auto it = ids_.find(key); it != ids_.end()) {
      return it->second;
    }
    if (entries_.size() >= capacity_) {
      throw CapacityError("attribute dictionary capacity (" + std::to_string(capacity_) +
                          ") exceeded while encoding " + std::string(name) + "=" +
                          std::string(value));
    }
    const auto id = static_cast<AttributeId>(entries_.size());
    entries_.emplace_back(std::string(name), std::string(value));
    ids_.emplace(std::move(key), id);
    return id;
  }

  /// Returns kNullAttribute when the pair was never encoded.
  AttributeId find(std::string_view name, std::string_view value) const {
    auto it = ids_.find(make_key(name, value));
    return it == ids_.end() ? kNullAttribute : it->second;
  }

  const Entry& decode(AttributeId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= entries_.size()) {
      throw std::out_of_range("unknown attribute id " + std::to_string(id));
    }
    return entries_[static_cast<std::size_t>(id)];
  }

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }

  /// Immutable copy of the id -> pair table for report decoding on
  /// other threads.
  std::shared_ptr<const std::vector<Entry>> snapshot() const {
    return std::make_shared<const std::vector<Entry>>(entries_);
  }

 private:
  // Names never contain '\x1f' in practice; it keeps the key unambiguous.
  static std::string make_key(std::string_view name, std::string_view value) {
    std::string key;
    key.reserve(name.size() + value.size() + 1);
    key.append(name);
    key.push_back('\x1f');
    key.append(value);
    return key;
  }

  std::size_t capacity_;
  std::vector<Entry> entries_;
  std::unordered_map<std::string, AttributeId> ids_;
};

}  // namespace fastdata

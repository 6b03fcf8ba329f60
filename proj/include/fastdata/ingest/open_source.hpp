#pragma once

#include <memory>

#include "fastdata/core/dictionary.hpp"
#include "fastdata/core/query_spec.hpp"
#include "fastdata/ingest/file_sources.hpp"
#include "fastdata/ingest/synthetic.hpp"

namespace fastdata {

inline ColumnSelection columns_of(const QuerySpec& spec) {
  return {spec.metric_columns, spec.attribute_columns, spec.timestamp_column,
          spec.attribute_buckets};
}

/// Opens the source a validated spec describes. File sources resolve
/// relative paths against the working directory.
inline std::unique_ptr<PointSource> open_source(const SourceDescriptor& desc, const QuerySpec& spec,
                                                AttributeDictionary& dict) {
  switch (desc.kind) {
    case SourceKind::CsvFile:
      return std::make_unique<CsvSource>(desc.path, columns_of(spec), dict, desc.batch_size);
    case SourceKind::JsonLines:
      return std::make_unique<JsonLinesSource>(desc.path, columns_of(spec), dict, desc.batch_size);
    case SourceKind::SyntheticDevices:
      return std::make_unique<DeviceSource>(desc.devices, dict, desc.batch_size);
    case SourceKind::SyntheticContamination:
      return std::make_unique<VectorSource>(contamination_points(desc.contamination),
                                            desc.batch_size);
    case SourceKind::SyntheticAdaptivity:
      return std::make_unique<AdaptivitySource>(desc.adaptivity, dict, desc.batch_size);
  }
  throw ConfigError("unknown source kind");
}

}  // namespace fastdata

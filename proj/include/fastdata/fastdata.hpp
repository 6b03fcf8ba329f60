#pragma once

// Everything except the REST layer (fastdata/service/rest.hpp), which
// pulls in the HTTP library.

#include "fastdata/error.hpp"
#include "fastdata/random.hpp"

#include "fastdata/core/dictionary.hpp"
#include "fastdata/core/operators.hpp"
#include "fastdata/core/point.hpp"
#include "fastdata/core/query_spec.hpp"

#include "fastdata/ingest/file_sources.hpp"
#include "fastdata/ingest/open_source.hpp"
#include "fastdata/ingest/source.hpp"
#include "fastdata/ingest/synthetic.hpp"

#include "fastdata/sketch/amc.hpp"
#include "fastdata/sketch/damped_reservoir.hpp"
#include "fastdata/sketch/decay_driver.hpp"
#include "fastdata/sketch/samplers.hpp"
#include "fastdata/sketch/space_saving.hpp"

#include "fastdata/classify/baselines.hpp"
#include "fastdata/classify/mad.hpp"
#include "fastdata/classify/mcd.hpp"
#include "fastdata/classify/model.hpp"
#include "fastdata/classify/threshold.hpp"

#include "fastdata/explain/batch.hpp"
#include "fastdata/explain/brute_force.hpp"
#include "fastdata/explain/confidence.hpp"
#include "fastdata/explain/fpgrowth.hpp"
#include "fastdata/explain/itemset_counter.hpp"
#include "fastdata/explain/ranking.hpp"
#include "fastdata/explain/risk_ratio.hpp"

#include "fastdata/stream/mcps_tree.hpp"
#include "fastdata/stream/summarizer.hpp"

#include "fastdata/engine/dynamic.hpp"
#include "fastdata/engine/experiments.hpp"
#include "fastdata/engine/pipeline.hpp"
#include "fastdata/engine/report.hpp"
#include "fastdata/engine/transforms.hpp"

#include "fastdata/service/query_manager.hpp"

#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fastdata/core/query_spec.hpp"
#include "fastdata/engine/pipeline.hpp"
#include "fastdata/engine/report.hpp"
#include "fastdata/error.hpp"
#include "fastdata/ingest/file_sources.hpp"

namespace fastdata {

enum class QueryState { Running, Done, Failed };

inline const char* to_string(QueryState s) {
  switch (s) {
    case QueryState::Running: return "running";
    case QueryState::Done: return "done";
    case QueryState::Failed: return "failed";
  }
  return "failed";
}

/// Submission rejected before it started; carries per-field messages.
class SpecRejected : public ConfigError {
 public:
  explicit SpecRejected(std::vector<FieldError> errors)
      : ConfigError(summary(errors)), errors_(std::move(errors)) {}
  const std::vector<FieldError>& errors() const { return errors_; }

 private:
  static std::string summary(const std::vector<FieldError>& errors) {
    std::string s;
    for (const auto& e : errors) s += (s.empty() ? "" : "; ") + e.field + ": " + e.message;
    return s;
  }
  std::vector<FieldError> errors_;
};

struct QueryStatus {
  std::string id;
  QueryState state = QueryState::Running;
  std::string mode;
  std::size_t progress = 0;   // points processed
  std::size_t emissions = 0;  // reports produced so far
  std::string error;
};

inline nlohmann::json to_json(const QueryStatus& s) {
  nlohmann::json j{{"queryId", s.id},
                   {"state", to_string(s.state)},
                   {"mode", s.mode},
                   {"progress", {{"pointsProcessed", s.progress}}},
                   {"emissions", s.emissions}};
  if (!s.error.empty()) j["error"] = s.error;
  return j;
}

struct ColumnInfo {
  std::string name;
  std::string type;  // "numeric" or "categorical"
};

/// Column names and types of a CSV or JSON-lines file, judged from the
/// first max_rows rows: a column is numeric when every nonempty value
/// parses as a finite number.
inline std::vector<ColumnInfo> infer_schema(const std::filesystem::path& path, std::size_t max_rows = 100) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::string> names;
  std::vector<bool> numeric;
  std::vector<bool> seen;
  auto note = [&](std::size_t i, bool is_num) {
    numeric[i] = numeric[i] && is_num;
    seen[i] = true;
  };
  std::string line;
  if (path.extension() == ".jsonl" || path.extension() == ".ndjson") {
    std::map<std::string, std::size_t> index;
    for (std::size_t row = 0; row < max_rows && std::getline(in, line);) {
      if (detail::trim(line).empty()) continue;
      ++row;
      const auto j = nlohmann::json::parse(line, nullptr, false);
      if (!j.is_object()) continue;
      for (const auto& [k, v] : j.items()) {
        auto [it, fresh] = index.try_emplace(k, names.size());
        if (fresh) {
          names.push_back(k);
          numeric.push_back(true);
          seen.push_back(false);
        }
        if (!v.is_null()) note(it->second, v.is_number());
      }
    }
  } else {
    if (!std::getline(in, line)) return {};
    for (auto& h : detail::split_csv(line)) names.push_back(std::string(detail::trim(h)));
    numeric.assign(names.size(), true);
    seen.assign(names.size(), false);
    for (std::size_t row = 0; row < max_rows && std::getline(in, line); ++row) {
      const auto cells = detail::split_csv(line);
      for (std::size_t i = 0; i < names.size() && i < cells.size(); ++i) {
        const auto cell = detail::trim(cells[i]);
        if (!cell.empty()) note(i, detail::parse_real(cell).has_value());
      }
    }
  }
  std::vector<ColumnInfo> out;
  for (std::size_t i = 0; i < names.size(); ++i)
    out.push_back({names[i], numeric[i] && seen[i] ? "numeric" : "categorical"});
  return out;
}

/// Owns the running queries. Each query runs on its own thread; callers
/// only see immutable report snapshots and post control messages
/// (emit, cancel).
class QueryManager {
 public:
  struct Options {
    std::filesystem::path data_dir = ".";
    std::size_t keep_emissions = 16;
    std::filesystem::path report_log;  // evicted emissions appended here when set
  };

  explicit QueryManager(Options o) : opts_(std::move(o)) {
    std::error_code ec;
    root_ = std::filesystem::weakly_canonical(opts_.data_dir, ec);
    if (ec) root_ = std::filesystem::absolute(opts_.data_dir);
  }

  ~QueryManager() {
    std::map<std::string, std::shared_ptr<Job>> jobs;
    {
      std::lock_guard lk(mu_);
      jobs.swap(jobs_);
    }
    for (auto& [id, j] : jobs) j->thread.request_stop();
    jobs.clear();  // joins
  }

  QueryManager(const QueryManager&) = delete;
  QueryManager& operator=(const QueryManager&) = delete;

  const std::filesystem::path& data_dir() const { return root_; }

  /// Resolves a dataset id to a file inside the data directory.
  std::optional<std::filesystem::path> dataset_path(const std::string& id) const {
    if (id.empty()) return std::nullopt;
    const std::filesystem::path rel(id);
    if (rel.is_absolute()) return std::nullopt;
    std::error_code ec;
    const auto full = std::filesystem::weakly_canonical(root_ / rel, ec);
    if (ec) return std::nullopt;
    const auto r = full.lexically_relative(root_);
    if (r.empty() || *r.begin() == "..") return std::nullopt;
    if (!std::filesystem::is_regular_file(full, ec)) return std::nullopt;
    return full;
  }

  std::vector<std::string> datasets() const {
    std::vector<std::string> out;
    std::error_code ec;
    for (const auto& e : std::filesystem::directory_iterator(root_, ec)) {
      const auto ext = e.path().extension();
      if (e.is_regular_file() && (ext == ".csv" || ext == ".jsonl" || ext == ".ndjson"))
        out.push_back(e.path().filename().string());
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Validates and starts a query. Throws SpecRejected.
  std::string submit(const nlohmann::json& body) {
    auto v = parse_query_spec(body);
    if (v.ok()) {
      auto& src = v.spec.source;
      if (src.kind == SourceKind::CsvFile || src.kind == SourceKind::JsonLines) {
        if (auto p = dataset_path(src.path)) {
          src.path = p->string();
        } else {
          v.errors.push_back({"source.path", "no dataset '" + src.path + "' in the data directory"});
        }
      }
    }
    if (!v.ok()) throw SpecRejected(v.errors);

    auto job = std::make_shared<Job>();
    job->spec = v.spec;
    job->mode = v.spec.mode == QueryMode::OneShot ? "oneshot" : "streaming";
    {
      std::lock_guard lk(mu_);
      std::string id = v.spec.query_id;
      if (id.empty() || jobs_.count(id)) id = "q" + std::to_string(++counter_);
      while (jobs_.count(id)) id = "q" + std::to_string(++counter_);
      job->id = id;
      job->spec.query_id = id;
      jobs_[id] = job;
    }
    job->thread = std::jthread([this, job](std::stop_token st) { run(*job, st); });
    return job->id;
  }

  std::optional<QueryStatus> status(const std::string& id) const {
    auto job = find(id);
    if (!job) return std::nullopt;
    std::lock_guard lk(job->mu);
    return QueryStatus{job->id, job->state, job->mode, job->progress.load(), job->emitted, job->error};
  }

  /// Latest emission, if any.
  std::shared_ptr<const QueryReport> latest_report(const std::string& id) const {
    auto job = find(id);
    if (!job) return nullptr;
    std::lock_guard lk(job->mu);
    return job->reports.empty() ? nullptr : job->reports.back();
  }

  /// Retained emissions, oldest first.
  std::vector<std::shared_ptr<const QueryReport>> reports(const std::string& id) const {
    auto job = find(id);
    if (!job) return {};
    std::lock_guard lk(job->mu);
    return {job->reports.begin(), job->reports.end()};
  }

  enum class EmitOutcome { Emitted, NotFound, NotStreaming, Failed, TimedOut };

  /// Asks a streaming query for an emission at its next batch boundary
  /// and waits for it. A finished query answers with its final report.
  std::pair<EmitOutcome, std::shared_ptr<const QueryReport>> request_emit(
      const std::string& id, std::chrono::milliseconds timeout = std::chrono::seconds(30)) {
    auto job = find(id);
    if (!job) return {EmitOutcome::NotFound, nullptr};
    if (job->mode != "streaming") return {EmitOutcome::NotStreaming, nullptr};
    std::unique_lock lk(job->mu);
    if (job->state == QueryState::Failed) return {EmitOutcome::Failed, nullptr};
    const std::size_t before = job->emitted;
    job->emit_flag = true;
    const bool ok = job->cv.wait_for(lk, timeout, [&] { return job->emitted > before || job->state != QueryState::Running; });
    if (job->state == QueryState::Failed) return {EmitOutcome::Failed, nullptr};
    if (!ok) return {EmitOutcome::TimedOut, nullptr};
    return {EmitOutcome::Emitted, job->reports.empty() ? nullptr : job->reports.back()};
  }

  /// Stops and forgets a query. Returns false for unknown ids.
  bool cancel(const std::string& id) {
    std::shared_ptr<Job> job;
    {
      std::lock_guard lk(mu_);
      auto it = jobs_.find(id);
      if (it == jobs_.end()) return false;
      job = it->second;
      jobs_.erase(it);
    }
    job->thread.request_stop();
    if (job->thread.joinable() && job->thread.get_id() != std::this_thread::get_id()) job->thread.join();
    return true;
  }

  /// Blocks until the query leaves the running state.
  bool wait(const std::string& id, std::chrono::milliseconds timeout) const {
    auto job = find(id);
    if (!job) return false;
    std::unique_lock lk(job->mu);
    return job->cv.wait_for(lk, timeout, [&] { return job->state != QueryState::Running; });
  }

 private:
  struct Job {
    std::string id;
    std::string mode;
    QuerySpec spec;
    mutable std::mutex mu;
    std::condition_variable cv;
    QueryState state = QueryState::Running;
    std::string error;
    std::atomic<std::size_t> progress{0};
    bool emit_flag = false;
    std::size_t emitted = 0;
    std::deque<std::shared_ptr<const QueryReport>> reports;
    std::jthread thread;  // last member: joined before the rest is destroyed
  };

  std::shared_ptr<Job> find(const std::string& id) const {
    std::lock_guard lk(mu_);
    auto it = jobs_.find(id);
    return it == jobs_.end() ? nullptr : it->second;
  }

  void run(Job& job, std::stop_token st) {
    RunHooks hooks;
    hooks.stop = st;
    hooks.on_progress = [&](std::size_t n) { job.progress = n; };
    hooks.emit_requested = [&] {
      std::lock_guard lk(job.mu);
      return std::exchange(job.emit_flag, false);
    };
    hooks.on_emit = [&](const QueryReport& r) { publish(job, r); };
    try {
      run_query(job.spec, hooks);
      std::lock_guard lk(job.mu);
      job.state = QueryState::Done;
    } catch (const std::exception& e) {
      std::lock_guard lk(job.mu);
      job.state = QueryState::Failed;
      job.error = e.what();
    }
    job.cv.notify_all();
  }

  void publish(Job& job, const QueryReport& r) {
    auto snap = std::make_shared<const QueryReport>(r);
    std::shared_ptr<const QueryReport> evicted;
    {
      std::lock_guard lk(job.mu);
      job.progress = r.points_processed;
      job.reports.push_back(std::move(snap));
      ++job.emitted;
      if (job.reports.size() > std::max<std::size_t>(1, opts_.keep_emissions)) {
        evicted = job.reports.front();
        job.reports.pop_front();
      }
    }
    job.cv.notify_all();
    if (evicted && !opts_.report_log.empty()) {
      std::lock_guard lk(log_mu_);
      std::ofstream(opts_.report_log, std::ios::app) << to_json(*evicted).dump() << '\n';
    }
  }

  Options opts_;
  std::filesystem::path root_;
  mutable std::mutex mu_;
  std::mutex log_mu_;
  std::map<std::string, std::shared_ptr<Job>> jobs_;
  std::size_t counter_ = 0;
};

}  // namespace fastdata

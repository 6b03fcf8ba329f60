#pragma once

#include <string>

#include <httplib.h>
#include <json.hpp>

#include "fastdata/service/query_manager.hpp"

namespace fastdata {

namespace detail {

inline void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline void send_error(httplib::Response& res, int status, const std::string& error, const std::string& detail,
                       nlohmann::json extra = nlohmann::json::object()) {
  extra["error"] = error;
  extra["detail"] = detail;
  send_json(res, status, extra);
}

}  // namespace detail

/// Installs the /api routes. Handlers only read report snapshots and
/// post control messages to the manager.
inline void install_routes(httplib::Server& srv, QueryManager& mgr) {
  using detail::send_error;
  using detail::send_json;
  using nlohmann::json;

  srv.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"}});
  });

  srv.Post("/api/queries", [&mgr](const httplib::Request& req, httplib::Response& res) {
    const auto body = json::parse(req.body, nullptr, false);
    if (body.is_discarded()) return send_error(res, 400, "invalid JSON", "request body is not valid JSON");
    try {
      send_json(res, 200, {{"queryId", mgr.submit(body)}});
    } catch (const SpecRejected& e) {
      json fields = json::array();
      for (const auto& f : e.errors()) fields.push_back({{"field", f.field}, {"message", f.message}});
      send_error(res, 400, "invalid query spec", e.what(), {{"fields", fields}});
    }
  });

  srv.Get(R"(/api/queries/([^/]+))", [&mgr](const httplib::Request& req, httplib::Response& res) {
    const auto s = mgr.status(req.matches[1]);
    if (!s) return send_error(res, 404, "unknown query", req.matches[1].str());
    send_json(res, 200, to_json(*s));
  });

  srv.Get(R"(/api/queries/([^/]+)/report)", [&mgr](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    const auto s = mgr.status(id);
    if (!s) return send_error(res, 404, "unknown query", id);
    if (s->state == QueryState::Failed)
      return send_error(res, 409, "query failed", s->error, {{"state", to_string(s->state)}});
    const bool final_only = s->mode == "oneshot";
    auto rep = mgr.latest_report(id);
    if (!rep || (final_only && s->state == QueryState::Running))
      return send_error(res, 409, "report not ready", "query is still running", {{"state", to_string(s->state)}});
    send_json(res, 200, to_json(*rep));
  });

  srv.Post(R"(/api/queries/([^/]+)/emit)", [&mgr](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    auto [outcome, rep] = mgr.request_emit(id);
    switch (outcome) {
      case QueryManager::EmitOutcome::NotFound:
        return send_error(res, 404, "unknown query", id);
      case QueryManager::EmitOutcome::NotStreaming:
        return send_error(res, 409, "not a streaming query", "one-shot queries report once, at completion");
      case QueryManager::EmitOutcome::Failed:
        return send_error(res, 409, "query failed", mgr.status(id) ? mgr.status(id)->error : "");
      case QueryManager::EmitOutcome::TimedOut:
        return send_error(res, 504, "emission timed out", "no batch boundary reached in time");
      case QueryManager::EmitOutcome::Emitted:
        break;
    }
    json body{{"queryId", id}};
    if (rep) {
      body["emission"] = rep->emission;
      body["pointsProcessed"] = rep->points_processed;
    }
    send_json(res, 200, body);
  });

  srv.Delete(R"(/api/queries/([^/]+))", [&mgr](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    if (!mgr.cancel(id)) return send_error(res, 404, "unknown query", id);
    send_json(res, 200, {{"queryId", id}, {"cancelled", true}});
  });

  srv.Get("/api/datasets", [&mgr](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"datasets", mgr.datasets()}});
  });

  srv.Get(R"(/api/datasets/(.+)/schema)", [&mgr](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    const auto path = mgr.dataset_path(id);
    if (!path) return send_error(res, 404, "unknown dataset", id);
    try {
      json cols = json::array();
      for (const auto& c : infer_schema(*path)) cols.push_back({{"name", c.name}, {"type", c.type}});
      send_json(res, 200, {{"datasetId", id}, {"columns", cols}});
    } catch (const std::exception& e) {
      send_error(res, 422, "unreadable dataset", e.what());
    }
  });

  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "unknown error";
    try {
      if (ep) std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    send_error(res, 500, "internal error", what);
  });
}

}  // namespace fastdata

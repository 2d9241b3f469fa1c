#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "loadrank/controller.hpp"
#include "loadrank/domain.hpp"
#include "loadrank/emulator.hpp"

namespace loadrank {

struct ServiceConfig {
    Building building;
    ScenarioConfig scenario;
    CriteriaConfig criteria;
    ControllerModels models;
    ControllerOptions controller;
    /// Wall-clock pause between emulator steps of a free-running simulation.
    int step_interval_ms = 200;
    /// Measurement log mirror, one JSON object per line. Empty: memory only.
    std::string log_path;
};

struct HttpRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
    std::string accept;
};

struct HttpResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

/// Single-session backend: one building, one emulation, one event at a time.
///
/// All session state sits behind one mutex; the stepping thread takes it for a
/// whole emulator step, so handlers never see a half-applied step.
class Service {
public:
    explicit Service(ServiceConfig config);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Transport-independent router used by the HTTP server and the tests.
    HttpResponse handle(const HttpRequest& request);

    /// Binds and serves on a background thread; returns the bound port
    /// (pass 0 for any free port).
    int start_http(const std::string& host, int port);
    /// Serves on the calling thread until stop_http().
    void serve_blocking(const std::string& host, int port);
    void stop_http();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Snapshot of a building at rest: appliances at their baselines, zones empty.
MeasurementRecord nominal_snapshot(const Building& building, SimTime time);

}  // namespace loadrank

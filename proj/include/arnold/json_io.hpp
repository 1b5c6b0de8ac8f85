#pragma once

#include <string>
#include <vector>

#include "arnold/metrics.hpp"
#include "arnold/queue.hpp"
#include "arnold/sim.hpp"
#include "arnold/solver.hpp"
#include "arnold/topology.hpp"
#include "arnold/workload.hpp"

namespace arnold {

// File formats:
//   topology   {name, gpus_per_node, minipods: [{racks: [{nodes: int}]}]}
//   job        JobSpec fields with model {vocab, seq_len, hidden, layers, arch}
//   profiles   [{gpu_type, tag, r1, r2, j_dp, j_pp}]
//   placement  {rows, cols, cell_to_minipod, cell_to_node, rank_of_node}
//   trace      JSON lines, one TraceJob per line
//   settings   [{name, topology, job}]
//   events     JSON lines, one event per line
// All emitters use stable key ordering so outputs diff cleanly.

TopologySpec topology_from_json(const std::string& text);
std::string topology_to_json(const TopologySpec& spec);

JobSpec job_from_json(const std::string& text);
std::string job_to_json(const JobSpec& job);

ProfileDb profiles_from_json(const std::string& text);
std::string profiles_to_json(const ProfileDb& db);

std::string placement_to_json(const Placement& placement);
Placement placement_from_json(const std::string& text);

std::string solution_to_json(const MipSolution& solution, bool include_stats = true);
MipInstance instance_from_json(const std::string& text);
std::string instance_to_json(const MipInstance& instance);

// Malformed lines are reported with their 1-based line number.
std::vector<TraceJob> trace_from_jsonl(const std::string& text);
std::string trace_to_jsonl(const std::vector<TraceJob>& trace);

std::vector<BenchmarkSetting> settings_from_json(const std::string& text);

std::string events_to_jsonl(const std::vector<Event>& events);
std::string series_to_csv(const std::vector<SeriesPoint>& series);
std::string benchmark_to_csv(const std::vector<BenchmarkCell>& cells);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace arnold

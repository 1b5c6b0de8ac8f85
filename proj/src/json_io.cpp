#include "arnold/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace arnold {

using Json = nlohmann::ordered_json;

namespace {

Json parse(const std::string& text, const char* what) {
    try {
        return Json::parse(text);
    } catch (const std::exception& e) {
        throw IoError(std::string(what) + ": " + e.what());
    }
}

std::string fixed(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", value);
    return buf;
}

}  // namespace

TopologySpec topology_from_json(const std::string& text) {
    const Json j = parse(text, "topology");
    try {
        TopologySpec spec;
        spec.name = j.value("name", "cluster");
        spec.gpus_per_node = j.value("gpus_per_node", 8);
        for (const auto& pod : j.at("minipods")) {
            MinipodSpec pod_spec;
            for (const auto& rack : pod.at("racks"))
                pod_spec.racks.push_back({rack.at("nodes").get<int>()});
            spec.minipods.push_back(std::move(pod_spec));
        }
        return spec;
    } catch (const Json::exception& e) {
        throw IoError(std::string("topology: ") + e.what());
    }
}

std::string topology_to_json(const TopologySpec& spec) {
    Json j;
    j["name"] = spec.name;
    j["gpus_per_node"] = spec.gpus_per_node;
    j["minipods"] = Json::array();
    for (const auto& pod : spec.minipods) {
        Json racks = Json::array();
        for (const auto& rack : pod.racks) racks.push_back({{"nodes", rack.nodes}});
        j["minipods"].push_back({{"racks", racks}});
    }
    return j.dump(2) + "\n";
}

namespace {

JobSpec job_from_json_value(const Json& j) {
    JobSpec job;
    job.gpus = j.at("gpus").get<long long>();
    job.tp = j.at("tp").get<int>();
    job.pp = j.at("pp").get<int>();
    job.vp = j.value("vp", 1);
    job.gb = j.at("gb").get<long long>();
    job.mb = j.at("mb").get<long long>();
    job.gpu_type = j.value("gpu_type", "H800");
    job.bytes_per_element = j.value("bytes_per_element", 2);
    if (j.contains("dp_bytes")) job.dp_bytes = j.at("dp_bytes").get<int>();
    if (j.contains("pp_bytes")) job.pp_bytes = j.at("pp_bytes").get<int>();
    job.dp_volume_multiplier = j.value("dp_volume_multiplier", 1.0);

    const Json& model = j.at("model");
    job.model.vocab = model.at("vocab").get<long long>();
    job.model.seq_len = model.at("seq_len").get<long long>();
    job.model.hidden = model.at("hidden").get<long long>();
    job.model.layers = model.at("layers").get<long long>();
    if (model.contains("arch") && model.at("arch").is_object()) {
        const Json& arch = model.at("arch");
        if (arch.value("type", "dense") == "moe")
            job.model.moe = MoeArch{arch.at("experts").get<long long>(),
                                    arch.at("layer_params").get<long long>()};
    }
    return job;
}

Json job_to_json_value(const JobSpec& job) {
    Json j;
    j["gpus"] = job.gpus;
    j["tp"] = job.tp;
    j["pp"] = job.pp;
    j["vp"] = job.vp;
    j["gb"] = job.gb;
    j["mb"] = job.mb;
    j["gpu_type"] = job.gpu_type;
    j["bytes_per_element"] = job.bytes_per_element;
    if (job.dp_bytes) j["dp_bytes"] = *job.dp_bytes;
    if (job.pp_bytes) j["pp_bytes"] = *job.pp_bytes;
    if (job.dp_volume_multiplier != 1.0) j["dp_volume_multiplier"] = job.dp_volume_multiplier;
    Json model;
    model["vocab"] = job.model.vocab;
    model["seq_len"] = job.model.seq_len;
    model["hidden"] = job.model.hidden;
    model["layers"] = job.model.layers;
    if (job.model.moe)
        model["arch"] = {{"type", "moe"},
                         {"experts", job.model.moe->experts},
                         {"layer_params", job.model.moe->layer_params}};
    else
        model["arch"] = {{"type", "dense"}};
    j["model"] = model;
    return j;
}

}  // namespace

JobSpec job_from_json(const std::string& text) {
    try {
        return job_from_json_value(parse(text, "job"));
    } catch (const Json::exception& e) {
        throw IoError(std::string("job: ") + e.what());
    }
}

std::string job_to_json(const JobSpec& job) { return job_to_json_value(job).dump(2) + "\n"; }

ProfileDb profiles_from_json(const std::string& text) {
    const Json j = parse(text, "profiles");
    try {
        ProfileDb db;
        for (const auto& entry : j) {
            ProfileEntry p;
            p.gpu_type = entry.at("gpu_type").get<std::string>();
            p.tag = entry.value("tag", "");
            p.r1 = entry.at("r1").get<double>();
            p.r2 = entry.at("r2").get<double>();
            p.j_dp = entry.at("j_dp").get<double>();
            p.j_pp = entry.at("j_pp").get<double>();
            if (p.j_dp < 0 || p.j_pp < 0 || p.j_dp + p.j_pp <= 0)
                throw IoError("profiles: entry '" + p.tag +
                              "' needs j_dp, j_pp >= 0 with j_dp + j_pp > 0");
            db.push_back(std::move(p));
        }
        return db;
    } catch (const Json::exception& e) {
        throw IoError(std::string("profiles: ") + e.what());
    }
}

std::string profiles_to_json(const ProfileDb& db) {
    Json j = Json::array();
    for (const auto& p : db)
        j.push_back({{"gpu_type", p.gpu_type},
                     {"tag", p.tag},
                     {"r1", p.r1},
                     {"r2", p.r2},
                     {"j_dp", p.j_dp},
                     {"j_pp", p.j_pp}});
    return j.dump(2) + "\n";
}

std::string placement_to_json(const Placement& placement) {
    Json j;
    j["rows"] = placement.rows;
    j["cols"] = placement.cols;
    Json pods = Json::object();
    Json nodes = Json::object();
    for (int r = 0; r < placement.rows; ++r)
        for (int c = 0; c < placement.cols; ++c) {
            const std::string key = std::to_string(r) + "," + std::to_string(c);
            pods[key] = placement.minipod_at(r, c);
            nodes[key] = placement.node_at(r, c);
        }
    j["cell_to_minipod"] = pods;
    j["cell_to_node"] = nodes;
    Json ranks = Json::object();
    for (const auto& [node, rank] : placement.rank_of_node)
        ranks[std::to_string(node)] = rank;
    j["rank_of_node"] = ranks;
    return j.dump(2) + "\n";
}

Placement placement_from_json(const std::string& text) {
    const Json j = parse(text, "placement");
    try {
        Placement p;
        p.rows = j.at("rows").get<int>();
        p.cols = j.at("cols").get<int>();
        p.cell_minipod.assign(static_cast<size_t>(p.rows) * p.cols, -1);
        p.cell_node.assign(static_cast<size_t>(p.rows) * p.cols, -1);
        for (const auto& [key, value] : j.at("cell_to_minipod").items()) {
            const auto comma = key.find(',');
            const int r = std::stoi(key.substr(0, comma));
            const int c = std::stoi(key.substr(comma + 1));
            p.cell_minipod[static_cast<size_t>(r) * p.cols + c] = value.get<int>();
        }
        for (const auto& [key, value] : j.at("cell_to_node").items()) {
            const auto comma = key.find(',');
            const int r = std::stoi(key.substr(0, comma));
            const int c = std::stoi(key.substr(comma + 1));
            p.cell_node[static_cast<size_t>(r) * p.cols + c] = value.get<int>();
        }
        for (const auto& [key, value] : j.at("rank_of_node").items())
            p.rank_of_node[std::stoi(key)] = value.get<int>();
        return p;
    } catch (const Json::exception& e) {
        throw IoError(std::string("placement: ") + e.what());
    }
}

std::string solution_to_json(const MipSolution& solution, bool include_stats) {
    Json j;
    j["status"] = solution.status == SolveStatus::Optimal ? "optimal"
                  : solution.status == SolveStatus::FeasibleTimeLimit ? "feasible_time_limit"
                                                                      : "infeasible";
    j["objective"] = solution.objective;
    j["T"] = solution.t;
    j["y"] = solution.y;
    j["s"] = solution.s;
    j["p"] = solution.p;
    if (include_stats)
        j["stats"] = {{"nodes_explored", solution.stats.nodes_explored},
                      {"wall_ms", solution.stats.wall_ms}};
    return j.dump(2) + "\n";
}

MipInstance instance_from_json(const std::string& text) {
    const Json j = parse(text, "instance");
    try {
        MipInstance inst;
        inst.group_count = j.at("group_count").get<int>();
        inst.group_size = j.at("group_size").get<int>();
        inst.capacity_nodes = j.at("capacity_nodes").get<std::vector<int>>();
        inst.minipod_count = static_cast<int>(inst.capacity_nodes.size());
        inst.alpha = j.at("alpha").get<double>();
        inst.beta = j.at("beta").get<double>();
        inst.unit = j.value("unit", "row") == "column" ? SchedulingUnit::Column
                                                       : SchedulingUnit::Row;
        for (int c : inst.capacity_nodes)
            inst.capacities.push_back(static_cast<double>(c) / inst.group_size);
        inst.validate();
        return inst;
    } catch (const Json::exception& e) {
        throw IoError(std::string("instance: ") + e.what());
    }
}

std::string instance_to_json(const MipInstance& inst) {
    Json j;
    j["group_count"] = inst.group_count;
    j["group_size"] = inst.group_size;
    j["capacity_nodes"] = inst.capacity_nodes;
    j["alpha"] = inst.alpha;
    j["beta"] = inst.beta;
    j["unit"] = inst.unit == SchedulingUnit::Row ? "row" : "column";
    return j.dump(2) + "\n";
}

namespace {

TraceJob trace_job_from_json(const Json& j) {
    TraceJob job;
    job.id = j.at("id").get<std::string>();
    job.submit_time = j.at("submit_time").get<long long>();
    job.duration = j.at("duration").get<long long>();
    job.nodes = j.value("nodes", 1);
    job.priority = j.value("priority", 0);
    job.preemptable = j.value("preemptable", false);
    if (j.value("kind", "generic") == "lpj") {
        job.kind = TraceJob::Kind::Lpj;
        job.arrival_time = j.at("arrival_time").get<long long>();
        job.lpj_spec = job_from_json_value(j.at("job"));
        job.lpj_spec->validate();
        job.nodes = static_cast<int>(job.lpj_spec->gpus / 8);
        if (job.arrival_time <= job.submit_time)
            throw IoError("arrival_time must lie after submit_time");
    }
    if (j.contains("metadata"))
        for (const auto& [key, value] : j.at("metadata").items())
            job.metadata[key] = value.get<std::string>();
    if (job.duration <= 0 || job.nodes < 1)
        throw IoError("duration must be positive and nodes >= 1");
    return job;
}

Json trace_job_to_json(const TraceJob& job) {
    Json j;
    j["id"] = job.id;
    j["submit_time"] = job.submit_time;
    j["duration"] = job.duration;
    j["nodes"] = job.nodes;
    j["priority"] = job.priority;
    j["preemptable"] = job.preemptable;
    j["kind"] = job.kind == TraceJob::Kind::Lpj ? "lpj" : "generic";
    if (job.kind == TraceJob::Kind::Lpj) {
        j["arrival_time"] = job.arrival_time;
        j["job"] = job_to_json_value(*job.lpj_spec);
    }
    if (!job.metadata.empty()) {
        Json meta = Json::object();
        for (const auto& [key, value] : job.metadata) meta[key] = value;
        j["metadata"] = meta;
    }
    return j;
}

}  // namespace

std::vector<TraceJob> trace_from_jsonl(const std::string& text) {
    std::vector<TraceJob> trace;
    std::istringstream stream(text);
    std::string line;
    int line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            trace.push_back(trace_job_from_json(Json::parse(line)));
        } catch (const std::exception& e) {
            throw IoError("trace line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return trace;
}

std::string trace_to_jsonl(const std::vector<TraceJob>& trace) {
    std::string out;
    for (const auto& job : trace) out += trace_job_to_json(job).dump() + "\n";
    return out;
}

std::vector<BenchmarkSetting> settings_from_json(const std::string& text) {
    const Json j = parse(text, "settings");
    try {
        std::vector<BenchmarkSetting> settings;
        for (const auto& entry : j) {
            BenchmarkSetting s;
            s.name = entry.at("name").get<std::string>();
            s.topology = topology_from_json(entry.at("topology").dump());
            s.job = job_from_json_value(entry.at("job"));
            settings.push_back(std::move(s));
        }
        return settings;
    } catch (const Json::exception& e) {
        throw IoError(std::string("settings: ") + e.what());
    }
}

std::string events_to_jsonl(const std::vector<Event>& events) {
    std::string out;
    for (const auto& e : events) {
        Json j;
        j["time"] = e.time;
        j["kind"] = kind_name(e.kind);
        j["job"] = e.job;
        j["detail"] = e.detail;
        out += j.dump() + "\n";
    }
    return out;
}

std::string series_to_csv(const std::vector<SeriesPoint>& series) {
    std::string out = "time,allocation_rate,retention_rate,queue_length,delayed_count\n";
    for (const auto& p : series)
        out += std::to_string(p.time) + "," + fixed(p.allocation) + "," + fixed(p.retention) +
               "," + std::to_string(p.queue_length) + "," + std::to_string(p.delayed) + "\n";
    return out;
}

std::string benchmark_to_csv(const std::vector<BenchmarkCell>& cells) {
    std::string out = "setting,algorithm,alpha,score,latency_ms,status\n";
    for (const auto& c : cells) {
        out += c.setting + "," + c.algorithm + "," + fixed(c.alpha) + ",";
        out += (c.status == "ok" ? fixed(c.score) : "");
        out += "," + fixed(c.latency_ms) + "," + c.status + "\n";
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << content;
    if (!out.good()) throw IoError("short write to " + path);
}

}  // namespace arnold

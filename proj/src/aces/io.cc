#include "aces/io.h"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace aces {

Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    Json j;
    in >> j;
    return j;
}

void save_json_file(const Json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write failed: " + path);
}

Json circuit_to_json(const Circuit& c) {
    Json layers = Json::array();
    for (const Layer& l : c.layers) {
        Json gates = Json::array();
        for (const CliffordGate& g : l.gates) {
            Json jg = {{"kind", gate_kind_name(g.kind)}, {"q0", g.q0}};
            if (g.is_two_qubit()) jg["q1"] = g.q1;
            gates.push_back(std::move(jg));
        }
        layers.push_back({{"time", l.layer_time},
                          {"class", layer_class_name(l.layer_class)},
                          {"gates", std::move(gates)}});
    }
    Json j = {{"n", c.n},
              {"family", c.family},
              {"distance", c.distance},
              {"meas_reset_time", c.meas_reset_time},
              {"dynamically_decoupled", c.dynamically_decoupled},
              {"layers", std::move(layers)}};
    if (!c.is_measure_qubit.empty()) j["is_measure_qubit"] = c.is_measure_qubit;
    return j;
}

Circuit circuit_from_json(const Json& j) {
    Circuit c;
    c.n = j.at("n").get<uint32_t>();
    c.family = j.value("family", "custom");
    c.distance = j.value("distance", 0);
    c.meas_reset_time = j.at("meas_reset_time").get<double>();
    c.dynamically_decoupled = j.value("dynamically_decoupled", false);
    if (j.contains("is_measure_qubit"))
        c.is_measure_qubit = j.at("is_measure_qubit").get<std::vector<uint8_t>>();
    for (const Json& jl : j.at("layers")) {
        Layer l;
        l.layer_time = jl.at("time").get<double>();
        l.layer_class = layer_class_from_name(jl.at("class").get<std::string>());
        for (const Json& jg : jl.at("gates")) {
            CliffordGate g;
            g.kind = gate_kind_from_name(jg.at("kind").get<std::string>());
            g.q0 = jg.at("q0").get<uint32_t>();
            if (jg.contains("q1")) g.q1 = jg.at("q1").get<uint32_t>();
            l.gates.push_back(g);
        }
        l.finalise(c.n);
        c.layers.push_back(std::move(l));
    }
    c.compute_unique_index();
    return c;
}

Json noise_to_json(const NoiseModel& m) {
    Json channels = Json::array();
    for (const GateChannel& ch : m.channels) {
        channels.push_back({{"layer", ch.id.layer},
                            {"gate", ch.id.gate},
                            {"qubits", ch.qubits},
                            {"probs", ch.probs}});
    }
    return {{"generator", m.generator},
            {"params", m.params},
            {"seed", m.seed},
            {"n", m.n},
            {"channels", std::move(channels)}};
}

NoiseModel noise_from_json(const Json& j) {
    NoiseModel m;
    m.generator = j.value("generator", "custom");
    m.params = j.value("params", std::vector<double>{});
    m.seed = j.value("seed", (uint64_t)0);
    m.n = j.at("n").get<uint32_t>();
    for (const Json& jc : j.at("channels")) {
        GateChannel ch;
        ch.id.layer = jc.at("layer").get<int32_t>();
        ch.id.gate = jc.at("gate").get<int32_t>();
        ch.qubits = jc.at("qubits").get<std::vector<uint32_t>>();
        ch.probs = jc.at("probs").get<std::vector<double>>();
        ch.refresh_eigenvalues();
        m.channels.push_back(std::move(ch));
    }
    m.rebuild_index();
    return m;
}

Json design_to_json(const ExperimentalDesign& d) {
    Json tuples = Json::array();
    for (const TupleBlock& b : d.blocks) tuples.push_back(b.tuple.entries);
    return {{"circuit", circuit_to_json(d.circuit)},
            {"tuples", std::move(tuples)},
            {"weights", d.weights}};
}

ExperimentalDesign design_from_json(const Json& j) {
    Circuit c = circuit_from_json(j.at("circuit"));
    std::vector<LayerTuple> tuples;
    for (const Json& jt : j.at("tuples"))
        tuples.push_back(LayerTuple{jt.get<std::vector<int>>()});
    ExperimentalDesign d = build_design(c, tuples);
    if (j.contains("weights")) {
        std::vector<double> w = j.at("weights").get<std::vector<double>>();
        if (w.size() != d.blocks.size())
            throw IoError("design weights do not match the tuple count");
        d.weights = std::move(w);
    }
    return d;
}

namespace {

std::string counts_path_for(const std::string& header_path) {
    std::string base = header_path;
    size_t dot = base.rfind(".json");
    if (dot == base.size() - 5) base = base.substr(0, dot);
    return base + ".counts";
}

std::string basename_of(const std::string& path) {
    size_t slash = path.find_last_of('/');
    return slash == std::string::npos ? path : path.substr(slash + 1);
}

std::string dirname_of(const std::string& path) {
    size_t slash = path.find_last_of('/');
    return slash == std::string::npos ? "" : path.substr(0, slash + 1);
}

void put_le64(std::ofstream& out, uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; i++) buf[i] = (unsigned char)(v >> (8 * i));
    out.write((const char*)buf, 8);
}

uint64_t get_le64(std::ifstream& in) {
    unsigned char buf[8];
    in.read((char*)buf, 8);
    if (!in) throw IoError("truncated count file");
    uint64_t v = 0;
    for (int i = 0; i < 8; i++) v |= (uint64_t)buf[i] << (8 * i);
    return v;
}

}  // namespace

void save_dataset(const OutcomeDataset& data, const std::string& path) {
    std::string counts_path = counts_path_for(path);
    Json tuples = Json::array();
    size_t total = 0;
    for (const TupleOutcome& t : data.tuples) {
        Json exps = Json::array();
        for (const ExperimentOutcome& e : t.experiments) {
            exps.push_back({{"shots", e.shots}, {"rows", e.plus.size()}});
            total += e.plus.size();
        }
        tuples.push_back(std::move(exps));
    }
    Json header = {{"format", "aces-outcome-dataset-v1"},
                   {"S", data.S},
                   {"seed", data.seed},
                   {"mode", data.mode},
                   {"noise_generator", data.noise_generator},
                   {"noise_seed", data.noise_seed},
                   {"counts_file", basename_of(counts_path)},
                   {"count_entries", total},
                   {"tuples", std::move(tuples)}};

    std::ofstream out(counts_path, std::ios::binary);
    if (!out) throw IoError("cannot write " + counts_path);
    for (const TupleOutcome& t : data.tuples)
        for (const ExperimentOutcome& e : t.experiments)
            for (int64_t v : e.plus) put_le64(out, (uint64_t)v);
    out.close();
    if (!out) throw IoError("write failed: " + counts_path);
    save_json_file(header, path);
}

OutcomeDataset load_dataset(const std::string& path) {
    Json header = load_json_file(path);
    if (header.value("format", "") != "aces-outcome-dataset-v1")
        throw IoError("unrecognised dataset header: " + path);
    OutcomeDataset data;
    data.S = header.at("S").get<double>();
    data.seed = header.at("seed").get<uint64_t>();
    data.mode = header.at("mode").get<std::string>();
    data.noise_generator = header.value("noise_generator", "");
    data.noise_seed = header.value("noise_seed", (uint64_t)0);

    std::string counts_path =
        dirname_of(path) + header.at("counts_file").get<std::string>();
    std::ifstream in(counts_path, std::ios::binary);
    if (!in) throw IoError("cannot open " + counts_path);
    for (const Json& jt : header.at("tuples")) {
        TupleOutcome t;
        for (const Json& je : jt) {
            ExperimentOutcome e;
            e.shots = je.at("shots").get<int64_t>();
            e.plus.resize(je.at("rows").get<size_t>());
            for (int64_t& v : e.plus) v = (int64_t)get_le64(in);
            t.experiments.push_back(std::move(e));
        }
        data.tuples.push_back(std::move(t));
    }
    return data;
}

Json report_to_json(const EstimationReport& rep) {
    const FitResult& f = rep.fit;
    Json fit = {{"method", fit_method_name(f.method)},
                {"rows_excluded", f.rows_excluded},
                {"rows_clipped", f.rows_clipped},
                {"negative_zeroed", f.negative_zeroed},
                {"clipped_to_one", f.clipped_to_one},
                {"iterations", f.iterations},
                {"converged", f.converged},
                {"fell_back_to_wls", f.fell_back_to_wls},
                {"x_hat", f.x_hat},
                {"lambda_hat", f.lambda_hat}};
    Json j = {{"fit", std::move(fit)}, {"s_prime", rep.s_prime}};
    if (rep.has_truth) {
        j["nrmse"] = rep.nrmse;
        Json tvds = Json::array();
        for (const GateTvdEntry& e : rep.gate_tvds)
            tvds.push_back({{"layer", e.id.layer},
                            {"gate", e.id.gate},
                            {"type", e.type},
                            {"tvd", e.tvd}});
        j["gate_tvds"] = std::move(tvds);
        j["type_median_tvd"] = rep.type_median_tvd;
    }
    return j;
}

void write_history_csv(const OptimisationHistory& history, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "step,action,merit,detail\n";
    for (size_t i = 0; i < history.size(); i++)
        out << i << "," << history[i].action << "," << history[i].merit << ","
            << history[i].detail << "\n";
    if (!out) throw IoError("write failed: " + path);
}

void write_distributions_csv(const ExperimentalDesign& d, const NoiseModel& recovered,
                             const NoiseModel* truth, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "layer,gate,type,pauli,p_est" << (truth ? ",p_true" : "") << "\n";
    for (const GateChannel& ch : recovered.channels) {
        std::string type = channel_type_name(d, ch.id);
        for (size_t a = 0; a < ch.probs.size(); a++) {
            out << ch.id.layer << "," << ch.id.gate << "," << type << "," << a << ","
                << ch.probs[a];
            if (truth) out << "," << truth->channel(ch.id).probs[a];
            out << "\n";
        }
    }
    if (!out) throw IoError("write failed: " + path);
}

void write_metrics_csv(const EstimationReport& rep, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "metric,value\n";
    out << "s_prime," << rep.s_prime << "\n";
    if (rep.has_truth) out << "nrmse," << rep.nrmse << "\n";
    for (const auto& [type, median] : rep.type_median_tvd)
        out << "median_tvd_" << type << "," << median << "\n";
    if (!out) throw IoError("write failed: " + path);
}

TupleSetFile load_tuple_set(const std::string& path) {
    Json j = load_json_file(path);
    TupleSetFile f;
    f.family = j.at("family").get<std::string>();
    f.distance = j.value("distance", 0);
    for (const Json& jt : j.at("tuples")) {
        std::vector<int> pattern = jt.at("pattern").get<std::vector<int>>();
        int reps = jt.value("repetitions", 1);
        if (reps < 1) throw IoError("tuple repetitions must be positive in " + path);
        LayerTuple t;
        for (int r = 0; r < reps; r++)
            t.entries.insert(t.entries.end(), pattern.begin(), pattern.end());
        f.tuples.push_back(std::move(t));
        f.weights.push_back(jt.at("weight").get<double>());
    }
    if (f.tuples.empty()) throw IoError("tuple set is empty: " + path);
    return f;
}

void write_manifest(const RunManifest& m, const std::string& path) {
    Json timings = Json::array();
    for (const auto& [stage, ms] : m.timings_ms)
        timings.push_back({{"stage", stage}, {"ms", ms}});
    Json j = {{"command", m.command},
              {"config_hash", m.config_hash},
              {"inputs", m.inputs},
              {"seed", m.seed},
              {"outputs", m.outputs},
              {"timings", std::move(timings)}};
    std::string tmp = path + ".tmp";
    save_json_file(j, tmp);
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw IoError("cannot move manifest into place: " + path);
}

std::string config_digest(const std::string& text) {
    // FNV-1a, stable across platforms.
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

}  // namespace aces

#include "alignnd/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "alignnd/errors.hpp"

namespace alignnd {

namespace {

constexpr const char* kMagic = "alignnd-checkpoint v1";

void append_g17(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

}  // namespace

std::string serialize_checkpoint(const ModelState& state) {
    std::string out;
    out += kMagic;
    out += "\nrep ";
    out += rep_name(state.cfg.rep);
    out += "\nlayers " + std::to_string(state.cfg.layers);
    out += "\nchannels " + std::to_string(state.cfg.channels);
    out += "\ncutoff_d ";
    append_g17(out, state.cfg.cutoff_d);
    out += "\ncutoff_angle ";
    append_g17(out, state.cfg.cutoff_angle);
    out += "\ngate_eps ";
    append_g17(out, state.cfg.gate_eps);
    out += "\nper_kind_heads " + std::to_string(state.cfg.per_kind_heads ? 1 : 0);
    out += "\nbond_angle_sincos " + std::to_string(state.cfg.bond_angle_sincos ? 1 : 0);
    out += "\n";
    for (const Parameter* p : state.parameters()) {
        out += "param " + p->name + " " + std::to_string(p->value.rows) + " " +
               std::to_string(p->value.cols) + "\n";
        for (int r = 0; r < p->value.rows; ++r) {
            const double* row = p->value.row(r);
            for (int c = 0; c < p->value.cols; ++c) {
                if (c) out += ' ';
                append_g17(out, row[c]);
            }
            out += '\n';
        }
    }
    return out;
}

ModelState deserialize_checkpoint(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kMagic) {
        throw DataError("checkpoint: bad or missing header");
    }

    ModelConfig cfg;
    auto expect_kv = [&](const char* key) -> std::string {
        if (!std::getline(in, line)) throw DataError("checkpoint: truncated header");
        std::istringstream ls(line);
        std::string k, v;
        ls >> k >> v;
        if (k != key) throw DataError("checkpoint: expected key '" + std::string(key) +
                                      "', found '" + k + "'");
        return v;
    };
    cfg.rep = rep_from_name(expect_kv("rep"));
    cfg.layers = std::stoi(expect_kv("layers"));
    cfg.channels = std::stoi(expect_kv("channels"));
    cfg.cutoff_d = std::stod(expect_kv("cutoff_d"));
    cfg.cutoff_angle = std::stod(expect_kv("cutoff_angle"));
    cfg.gate_eps = std::stod(expect_kv("gate_eps"));
    cfg.per_kind_heads = std::stoi(expect_kv("per_kind_heads")) != 0;
    cfg.bond_angle_sincos = std::stoi(expect_kv("bond_angle_sincos")) != 0;

    ModelState st = init_model(cfg, 0);
    for (Parameter* p : st.parameters()) {
        if (!std::getline(in, line)) throw DataError("checkpoint: missing record for " + p->name);
        std::istringstream ls(line);
        std::string tag, name;
        int rows = 0, cols = 0;
        if (!(ls >> tag >> name >> rows >> cols) || tag != "param") {
            throw DataError("checkpoint: malformed parameter record: '" + line + "'");
        }
        if (name != p->name) {
            throw DataError("checkpoint: expected parameter '" + p->name + "', found '" + name +
                            "'");
        }
        if (rows != p->value.rows || cols != p->value.cols) {
            throw DataError("checkpoint: shape mismatch for " + name);
        }
        for (int r = 0; r < rows; ++r) {
            if (!std::getline(in, line)) throw DataError("checkpoint: truncated values for " + name);
            std::istringstream vs(line);
            double* row = p->value.row(r);
            for (int c = 0; c < cols; ++c) {
                if (!(vs >> row[c])) throw DataError("checkpoint: bad value in " + name);
            }
        }
    }
    return st;
}

void save_checkpoint(const ModelState& state, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write checkpoint: " + path);
    out << serialize_checkpoint(state);
}

ModelState load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return deserialize_checkpoint(buf.str());
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

}  // namespace alignnd

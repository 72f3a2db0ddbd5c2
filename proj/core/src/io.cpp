#include "spo/io.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace spo::io {

using nlohmann::json;

namespace {

json to_json_vector(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

Eigen::VectorXd from_json_vector(const json& arr, const std::string& field) {
    if (!arr.is_array()) throw std::runtime_error("malformed field: " + field);
    Eigen::VectorXd v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
    return v;
}

json to_json_matrix(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd from_json_matrix(const json& rows, const std::string& field) {
    if (!rows.is_array() || rows.empty()) throw std::runtime_error("malformed field: " + field);
    const std::size_t nc = rows[0].size();
    Eigen::MatrixXd m(rows.size(), nc);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (!rows[r].is_array() || rows[r].size() != nc) {
            throw std::runtime_error("malformed field: " + field);
        }
        for (std::size_t c = 0; c < nc; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c].get<double>();
        }
    }
    return m;
}

json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("malformed JSON in " + path.string() + ": " + e.what());
    }
    return j;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

}  // namespace

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

void save_instance(const RelocationInstance& inst, const std::filesystem::path& path) {
    json j;
    j["n_grids"] = inst.n_grids;
    j["supply"] = to_json_vector(inst.supply);
    j["target"] = to_json_vector(inst.target);
    j["travel_time"] = to_json_matrix(inst.travel_time);
    j["cost"] = to_json_matrix(inst.cost);
    j["budget"] = inst.budget;
    j["interval"] = inst.interval;
    write_file(path, j.dump(2) + "\n");
}

RelocationInstance load_instance(const std::filesystem::path& path) {
    const json j = load_json_file(path);
    RelocationInstance inst;
    for (const char* field :
         {"n_grids", "supply", "target", "travel_time", "cost", "budget", "interval"}) {
        if (!j.contains(field)) {
            throw std::runtime_error("instance file " + path.string() + ": missing field '" +
                                     field + "'");
        }
    }
    inst.n_grids = j["n_grids"].get<int>();
    inst.supply = from_json_vector(j["supply"], "supply");
    inst.target = from_json_vector(j["target"], "target");
    inst.travel_time = from_json_matrix(j["travel_time"], "travel_time");
    inst.cost = from_json_matrix(j["cost"], "cost");
    inst.budget = j["budget"].get<double>();
    inst.interval = j["interval"].get<double>();
    inst.validate();
    return inst;
}

void save_weights(const PredictorWeights& w, const std::filesystem::path& path) {
    auto layer = [](const Eigen::MatrixXd& m) {
        json l;
        l["shape"] = {m.rows(), m.cols()};
        json data = json::array();
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
        l["data"] = std::move(data);
        return l;
    };
    json j;
    j["layers"]["w1"] = layer(w.w1);
    j["layers"]["b1"] = layer(w.b1);
    j["layers"]["w2"] = layer(w.w2);
    j["layers"]["b2"] = layer(Eigen::MatrixXd::Constant(1, 1, w.b2));
    write_file(path, j.dump(2) + "\n");
}

PredictorWeights load_weights(const std::filesystem::path& path) {
    const json j = load_json_file(path);
    auto layer = [&](const std::string& name) {
        const json& l = j.at("layers").at(name);
        const auto shape = l.at("shape");
        Eigen::MatrixXd m(shape[0].get<Eigen::Index>(), shape[1].get<Eigen::Index>());
        const auto& data = l.at("data");
        std::size_t k = 0;
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = data.at(k++).get<double>();
        return m;
    };
    PredictorWeights w;
    w.w1 = layer("w1");
    w.b1 = layer("b1");
    w.w2 = layer("w2");
    w.b2 = layer("b2")(0, 0);
    return w;
}

void save_demand_csv(const DemandSeries& series, const std::filesystem::path& path) {
    std::ostringstream os;
    os << "interval,grid,all,dedicated,free\n";
    for (int t = 0; t < series.n_intervals(); ++t) {
        for (int g = 0; g < series.n_grids(); ++g) {
            os << t << ',' << g << ',' << static_cast<long long>(series.all(t, g)) << ','
               << static_cast<long long>(series.dedicated(t, g)) << ','
               << static_cast<long long>(series.free(t, g)) << '\n';
        }
    }
    write_file(path, os.str());
}

DemandSeries load_demand_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty demand file " + path.string());

    struct Row {
        int t, g;
        double all, ded, fr;
    };
    std::vector<Row> rows;
    int max_t = -1, max_g = -1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Row r;
        std::istringstream ls(line);
        char comma;
        if (!(ls >> r.t >> comma >> r.g >> comma >> r.all >> comma >> r.ded >> comma >> r.fr)) {
            throw std::runtime_error("malformed demand row in " + path.string() + ": " + line);
        }
        max_t = std::max(max_t, r.t);
        max_g = std::max(max_g, r.g);
        rows.push_back(r);
    }
    DemandSeries s;
    s.all = Eigen::MatrixXd::Zero(max_t + 1, max_g + 1);
    s.dedicated = s.all;
    s.free = s.all;
    for (const Row& r : rows) {
        s.all(r.t, r.g) = r.all;
        s.dedicated(r.t, r.g) = r.ded;
        s.free(r.t, r.g) = r.fr;
    }
    return s;
}

void save_grid(const HexGrid& grid, const std::filesystem::path& path) {
    json j;
    j["rows"] = grid.rows;
    j["cols"] = grid.cols;
    j["edge_length"] = grid.edge_length;
    json axial = json::array();
    for (const auto& [q, r] : grid.axial) axial.push_back({q, r});
    j["axial"] = std::move(axial);
    j["neighbors"] = grid.neighbors;
    write_file(path, j.dump(2) + "\n");
}

HexGrid load_grid(const std::filesystem::path& path) {
    const json j = load_json_file(path);
    HexGrid g = make_hex_grid(j.at("rows").get<int>(), j.at("cols").get<int>());
    g.edge_length = j.at("edge_length").get<double>();
    return g;
}

void save_train_record_csv(const TrainRecord& rec, const std::filesystem::path& path) {
    std::ostringstream os;
    os << "epoch,l1,l2,l_spo,val_rmse,val_smape\n";
    for (std::size_t e = 0; e < rec.l1.size(); ++e) {
        os << e << ',' << format_double(rec.l1[e]) << ',' << format_double(rec.l2[e]) << ','
           << format_double(rec.l_spo[e]) << ',' << format_double(rec.val_rmse[e]) << ','
           << format_double(rec.val_smape[e]) << '\n';
    }
    write_file(path, os.str());
}

void save_divergence_csv(const Eigen::MatrixXd& matched, const Eigen::MatrixXd& target,
                         const std::filesystem::path& path) {
    if (matched.rows() != target.rows() || matched.cols() != target.cols()) {
        throw std::invalid_argument("save_divergence_csv: shape mismatch");
    }
    std::ostringstream os;
    os << "interval,grid,matched,target,abs_divergence\n";
    for (Eigen::Index t = 0; t < matched.rows(); ++t) {
        for (Eigen::Index g = 0; g < matched.cols(); ++g) {
            os << t << ',' << g << ',' << format_double(matched(t, g)) << ','
               << format_double(target(t, g)) << ','
               << format_double(std::abs(matched(t, g) - target(t, g))) << '\n';
        }
    }
    write_file(path, os.str());
}

}  // namespace spo::io

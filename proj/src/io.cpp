#include "midorf/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace midorf {

using nlohmann::json;

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    return out;
}

json vec_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

json mat_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::VectorXd vec_from_json(const json& a) {
    Eigen::VectorXd v(a.size());
    for (size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
    return v;
}

Eigen::MatrixXd mat_from_json(const json& rows) {
    if (rows.empty()) return {};
    Eigen::MatrixXd m(rows.size(), rows[0].size());
    for (size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows[0].size())
            throw DataError("ragged matrix in model file");
        for (size_t c = 0; c < rows[r].size(); ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                rows[r][c].get<double>();
    }
    return m;
}

json params_to_json(const TrainedModel& model) {
    json p;
    switch (model.method) {
        case Method::MiDorf: {
            const auto& v = std::get<ModelParams>(model.params);
            p["beta"] = vec_to_json(v.beta);
            p["first_cut"] = v.first_cut;
            p["log_gaps"] = vec_to_json(v.log_gaps);
            p["transition"] = mat_to_json(v.transition);
            p["card_weight"] = v.card_weight;
            break;
        }
        case Method::SilOr:
        case Method::MiOr: {
            const auto& v = std::get<OrdinalRegressorParams>(model.params);
            p["beta"] = vec_to_json(v.beta);
            p["first_cut"] = v.first_cut;
            p["log_gaps"] = vec_to_json(v.log_gaps);
            break;
        }
        case Method::Mir: {
            const auto& v = std::get<MirParams>(model.params);
            p["theta"] = vec_to_json(v.theta);
            p["gamma"] = v.gamma;
            break;
        }
        case Method::MiHcrf: {
            const auto& v = std::get<MiHcrfParams>(model.params);
            p["node_weights"] = mat_to_json(v.node_weights);
            p["transition"] = mat_to_json(v.transition);
            p["card_weight"] = v.card_weight;
            break;
        }
        case Method::Hcrf: {
            const auto& v = std::get<HcrfParams>(model.params);
            p["node_weights"] = mat_to_json(v.node_weights);
            p["transition"] = mat_to_json(v.transition);
            p["label_compat"] = mat_to_json(v.label_compat);
            break;
        }
        case Method::Hcorf: {
            const auto& v = std::get<HcorfParams>(model.params);
            p["beta"] = vec_to_json(v.beta);
            p["first_cut"] = v.first_cut;
            p["log_gaps"] = vec_to_json(v.log_gaps);
            p["transition"] = mat_to_json(v.transition);
            p["label_compat"] = mat_to_json(v.label_compat);
            break;
        }
    }
    return p;
}

MethodParams params_from_json(Method method, const json& p) {
    switch (method) {
        case Method::MiDorf: {
            ModelParams v;
            v.beta = vec_from_json(p.at("beta"));
            v.first_cut = p.at("first_cut").get<double>();
            v.log_gaps = vec_from_json(p.at("log_gaps"));
            v.transition = mat_from_json(p.at("transition"));
            v.card_weight = p.at("card_weight").get<double>();
            return v;
        }
        case Method::SilOr:
        case Method::MiOr: {
            OrdinalRegressorParams v;
            v.beta = vec_from_json(p.at("beta"));
            v.first_cut = p.at("first_cut").get<double>();
            v.log_gaps = vec_from_json(p.at("log_gaps"));
            return v;
        }
        case Method::Mir: {
            MirParams v;
            v.theta = vec_from_json(p.at("theta"));
            v.gamma = p.at("gamma").get<double>();
            return v;
        }
        case Method::MiHcrf: {
            MiHcrfParams v;
            v.node_weights = mat_from_json(p.at("node_weights"));
            v.transition = mat_from_json(p.at("transition"));
            v.card_weight = p.at("card_weight").get<double>();
            return v;
        }
        case Method::Hcrf: {
            HcrfParams v;
            v.node_weights = mat_from_json(p.at("node_weights"));
            v.transition = mat_from_json(p.at("transition"));
            v.label_compat = mat_from_json(p.at("label_compat"));
            return v;
        }
        case Method::Hcorf: {
            HcorfParams v;
            v.beta = vec_from_json(p.at("beta"));
            v.first_cut = p.at("first_cut").get<double>();
            v.log_gaps = vec_from_json(p.at("log_gaps"));
            v.transition = mat_from_json(p.at("transition"));
            v.label_compat = mat_from_json(p.at("label_compat"));
            return v;
        }
    }
    throw DataError("params_from_json: unknown method");
}

json optional_to_json(const std::optional<double>& v) {
    return v.has_value() ? json(*v) : json(nullptr);
}

}  // namespace

Dataset load_dataset_jsonl(const std::filesystem::path& path, std::optional<int> num_levels) {
    std::ifstream in = open_in(path);
    Dataset ds;
    std::string line;
    int max_label = 0;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        Bag bag;
        bag.id = rec.at("id").get<std::string>();
        const int raw_label = rec.at("label").get<int>();
        if (raw_label < 0)
            throw DataError(path.string() + ": bag '" + bag.id + "' has negative label");
        bag.bag_label = raw_label + 1;
        max_label = std::max(max_label, raw_label);

        const json& inst = rec.at("instances");
        if (inst.empty())
            throw DataError(path.string() + ": bag '" + bag.id + "' has no instances");
        const size_t d = inst[0].size();
        bag.instances.resize(static_cast<Eigen::Index>(inst.size()),
                             static_cast<Eigen::Index>(d));
        for (size_t t = 0; t < inst.size(); ++t) {
            if (inst[t].size() != d)
                throw DataError(path.string() + ": bag '" + bag.id +
                                "' has instances of mixed dimension");
            for (size_t j = 0; j < d; ++j)
                bag.instances(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) =
                    inst[t][j].get<double>();
        }
        if (rec.contains("instance_labels") && !rec["instance_labels"].is_null()) {
            for (const auto& v : rec["instance_labels"]) {
                const int raw = v.get<int>();
                if (raw < 0)
                    throw DataError(path.string() + ": bag '" + bag.id +
                                    "' has negative instance label");
                bag.instance_labels.push_back(raw + 1);
                max_label = std::max(max_label, raw);
            }
        }
        ds.bags.push_back(std::move(bag));
    }
    if (ds.bags.empty()) throw DataError(path.string() + ": no bags");
    ds.feature_dim = ds.bags.front().dim();
    ds.scale.num_levels = num_levels.value_or(std::max(max_label + 1, 2));
    return ds;
}

void save_dataset_jsonl(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    for (const Bag& bag : ds.bags) {
        json rec;
        rec["id"] = bag.id;
        rec["label"] = bag.bag_label - 1;
        json inst = json::array();
        for (int t = 0; t < bag.length(); ++t) {
            json row = json::array();
            for (int j = 0; j < bag.dim(); ++j) row.push_back(bag.instances(t, j));
            inst.push_back(std::move(row));
        }
        rec["instances"] = std::move(inst);
        if (!bag.instance_labels.empty()) {
            json labels = json::array();
            for (Level l : bag.instance_labels) labels.push_back(l - 1);
            rec["instance_labels"] = std::move(labels);
        }
        out << rec.dump() << '\n';
    }
}

void save_model(const TrainedModel& model, const TrainMeta& meta,
                const std::filesystem::path& path) {
    json doc;
    doc["format_version"] = 1;
    doc["method"] = to_string(model.method);
    doc["scale"] = model.num_levels;
    doc["feature_dim"] = model.feature_dim;
    doc["params"] = params_to_json(model);
    doc["train_meta"] = {{"seed", meta.seed}, {"alpha", meta.alpha},
                         {"iterations", meta.iterations}};
    open_out(path) << doc.dump(2) << '\n';
}

TrainedModel load_model(const std::filesystem::path& path, TrainMeta* meta) {
    json doc;
    try {
        doc = json::parse(open_in(path));
    } catch (const json::parse_error& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    if (doc.at("format_version").get<int>() != 1)
        throw DataError(path.string() + ": unsupported format_version");
    TrainedModel model;
    model.method = method_from_string(doc.at("method").get<std::string>());
    model.num_levels = doc.at("scale").get<int>();
    model.feature_dim = doc.at("feature_dim").get<int>();
    model.params = params_from_json(model.method, doc.at("params"));
    if (meta != nullptr && doc.contains("train_meta")) {
        const json& m = doc["train_meta"];
        meta->seed = m.value("seed", 0ULL);
        meta->alpha = m.value("alpha", 0.0);
        meta->iterations = m.value("iterations", 0);
    }
    return model;
}

void save_predictions(const std::vector<BagPrediction>& predictions,
                      const std::filesystem::path& path, bool with_frames, bool with_bags) {
    std::ofstream out = open_out(path);
    for (const BagPrediction& p : predictions) {
        json rec;
        rec["id"] = p.id;
        if (with_bags) rec["bag_pred"] = p.bag_pred - 1;
        if (with_frames) {
            json frames = json::array();
            for (Level l : p.frame_preds) frames.push_back(l - 1);
            rec["frame_preds"] = std::move(frames);
        }
        if (!p.bag_posterior.empty()) rec["bag_posterior"] = p.bag_posterior;
        out << rec.dump() << '\n';
    }
}

std::vector<BagPrediction> load_predictions(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    std::vector<BagPrediction> out;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        BagPrediction p;
        p.id = rec.at("id").get<std::string>();
        if (rec.contains("bag_pred")) p.bag_pred = rec["bag_pred"].get<int>() + 1;
        if (rec.contains("frame_preds"))
            for (const auto& v : rec["frame_preds"]) p.frame_preds.push_back(v.get<int>() + 1);
        if (rec.contains("bag_posterior"))
            for (const auto& v : rec["bag_posterior"]) p.bag_posterior.push_back(v.get<double>());
        out.push_back(std::move(p));
    }
    return out;
}

std::string report_to_json(const MetricsReport& report) {
    json doc;
    if (report.has_frame) {
        doc["frame"] = {{"corr", optional_to_json(report.frame_corr)},
                        {"icc", optional_to_json(report.frame_icc)},
                        {"mae", report.frame_mae}};
    } else {
        doc["frame"] = nullptr;
    }
    doc["sequence"] = {{"corr", optional_to_json(report.seq_corr)},
                       {"icc", optional_to_json(report.seq_icc)},
                       {"mae", report.seq_mae},
                       {"acc", report.seq_acc},
                       {"f1_macro", report.seq_f1}};
    doc["counts"] = {{"frames", report.frames}, {"sequences", report.sequences}};
    doc["flags"] = report.flags;
    return doc.dump(2);
}

std::string report_table(const MetricsReport& report) {
    std::ostringstream os;
    auto cell = [](const std::optional<double>& v) {
        if (!v.has_value()) return std::string("   n/a");
        std::ostringstream c;
        c << std::fixed << std::setprecision(3) << std::setw(6) << *v;
        return c.str();
    };
    os << "level      CORR    MAE    ICC    ACC     F1\n";
    if (report.has_frame)
        os << "frame    " << cell(report.frame_corr) << " " << cell(report.frame_mae) << " "
           << cell(report.frame_icc) << "    n/a    n/a\n";
    os << "sequence " << cell(report.seq_corr) << " " << cell(report.seq_mae) << " "
       << cell(report.seq_icc) << " " << cell(report.seq_acc) << " " << cell(report.seq_f1)
       << "\n";
    for (const std::string& f : report.flags) os << "note: " << f << "\n";
    return os.str();
}

}  // namespace midorf

#include "linucbd/trace_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "linucbd/error.hpp"
#include "linucbd/presets.hpp"

namespace linucbd {

namespace {

nlohmann::json matrix_columns(const Matrix& m) {
  auto cols = nlohmann::json::array();
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    cols.push_back(std::vector<double>(m.col(j).data(), m.col(j).data() + m.rows()));
  }
  return cols;
}

Matrix matrix_from_columns(const nlohmann::json& cols) {
  const auto ncols = static_cast<Eigen::Index>(cols.size());
  const auto nrows = ncols ? static_cast<Eigen::Index>(cols.at(0).size()) : 0;
  Matrix m(nrows, ncols);
  for (Eigen::Index j = 0; j < ncols; ++j) {
    const auto col = cols.at(static_cast<std::size_t>(j)).get<std::vector<double>>();
    if (static_cast<Eigen::Index>(col.size()) != nrows) {
      throw Error(ErrorCode::kParse, "ragged anchor matrix");
    }
    for (Eigen::Index i = 0; i < nrows; ++i) m(i, j) = col[static_cast<std::size_t>(i)];
  }
  return m;
}

template <typename T>
void append(std::vector<T>& dst, const nlohmann::json& arr, std::size_t expected) {
  if (!arr.is_array() || arr.size() != expected) throw Error(ErrorCode::kParse, "round record has wrong width");
  for (const auto& v : arr) dst.push_back(v.get<T>());
}

}  // namespace

nlohmann::json partition_to_json(const MetaContextPartition& p) {
  auto anchors = nlohmann::json::array();
  for (const auto& a : p.anchors) anchors.push_back(matrix_columns(a));
  return {{"anchors", std::move(anchors)}, {"lambda0", p.lambda0}, {"radius", p.radius},
          {"samples", p.samples}, {"hits", p.hits}, {"p_hat", p.p_hat}, {"p_lower", p.p_lower},
          {"p", p.p}, {"p_lower_min", p.p_lower_min}, {"verified", p.verified}};
}

MetaContextPartition partition_from_json(const nlohmann::json& doc) {
  try {
    MetaContextPartition p;
    for (const auto& a : doc.at("anchors")) p.anchors.push_back(matrix_from_columns(a));
    p.lambda0 = doc.at("lambda0").get<double>();
    p.radius = doc.at("radius").get<double>();
    p.samples = doc.value("samples", std::size_t{0});
    p.hits = doc.value("hits", std::vector<std::vector<std::size_t>>{});
    p.p_hat = doc.value("p_hat", std::vector<std::vector<double>>{});
    p.p_lower = doc.value("p_lower", std::vector<std::vector<double>>{});
    p.p = doc.at("p").get<double>();
    p.p_lower_min = doc.value("p_lower_min", 0.0);
    p.verified = doc.value("verified", false);
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad partition: ") + e.what());
  }
}

void write_trace(std::ostream& out, const Instance& instance, const Trace& trace,
                 const MetaContextPartition* partition) {
  nlohmann::json header = {{"instance", instance_to_json(instance)}, {"policy", trace.policy},
                           {"T", trace.rounds}, {"K", trace.arms}, {"d", trace.dim},
                           {"seed", trace.seed}};
  if (partition) header["partition"] = partition_to_json(*partition);
  out << header.dump() << '\n';
  const std::size_t K = trace.arms;
  const bool estimates = trace.has_estimates();
  const bool features = !trace.optimal_feature.empty();
  for (std::size_t t = 1; t <= trace.rounds; ++t) {
    const auto slice = [&](const std::vector<double>& v, std::size_t width) {
      const auto first = v.begin() + static_cast<std::ptrdiff_t>((t - 1) * width);
      return std::vector<double>(first, first + static_cast<std::ptrdiff_t>(width));
    };
    nlohmann::json row = {t, trace.context[t - 1], trace.chosen[t - 1], trace.optimal[t - 1],
                          trace.regret[t - 1], trace.alpha[t - 1]};
    row.push_back(estimates ? slice(trace.r_hat, K) : std::vector<double>{});
    row.push_back(estimates ? slice(trace.sigma_hat, K) : std::vector<double>{});
    row.push_back(slice(trace.reward, K));
    if (features) row.push_back(slice(trace.optimal_feature, trace.dim));
    out << row.dump() << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "failed writing trace");
}

void write_trace(const std::filesystem::path& path, const Instance& instance, const Trace& trace,
                 const MetaContextPartition* partition) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  write_trace(out, instance, trace, partition);
}

TraceFile read_trace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kParse, "empty trace file");
  try {
    const auto header = nlohmann::json::parse(line);
    TraceFile file{instance_from_json(header.at("instance")), {}, std::nullopt};
    if (header.contains("partition")) file.partition = partition_from_json(header.at("partition"));
    Trace& tr = file.trace;
    tr.policy = header.at("policy").get<std::string>();
    tr.rounds = header.at("T").get<std::size_t>();
    tr.arms = header.at("K").get<std::size_t>();
    tr.dim = header.at("d").get<std::size_t>();
    tr.seed = header.at("seed").get<std::uint64_t>();
    if (tr.arms != arm_count(file.instance) || tr.dim != dimension(file.instance)) {
      throw Error(ErrorCode::kParse, "trace header disagrees with its instance");
    }
    tr.reserve(tr.rounds, !is_finite(file.instance));
    std::size_t t = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto row = nlohmann::json::parse(line);
      ++t;
      if (!row.is_array() || row.size() < 9 || row.at(0).get<std::size_t>() != t) {
        throw Error(ErrorCode::kParse, "bad round record at line " + std::to_string(t + 1));
      }
      tr.context.push_back(row.at(1).get<std::int64_t>());
      tr.chosen.push_back(row.at(2).get<std::uint32_t>());
      tr.optimal.push_back(row.at(3).get<std::uint32_t>());
      tr.regret.push_back(row.at(4).get<double>());
      tr.alpha.push_back(row.at(5).get<double>());
      if (!row.at(6).empty()) {
        append(tr.r_hat, row.at(6), tr.arms);
        append(tr.sigma_hat, row.at(7), tr.arms);
      }
      append(tr.reward, row.at(8), tr.arms);
      if (row.size() > 9) append(tr.optimal_feature, row.at(9), tr.dim);
    }
    if (t != tr.rounds) {
      throw Error(ErrorCode::kParse, "trace declares T = " + std::to_string(tr.rounds) + " but holds " +
                                         std::to_string(t) + " rounds");
    }
    return file;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad trace: ") + e.what());
  }
}

TraceFile read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return read_trace(in);
}

}  // namespace linucbd

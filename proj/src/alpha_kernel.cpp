#include "xhammer/alpha_kernel.hpp"

#include <fstream>

#include "xhammer/error.hpp"

namespace xhammer {

double AlphaKernel::at(Offset d) const {
  auto it = alpha.find(d);
  return it == alpha.end() ? 0.0 : it->second.value;
}

double AlphaKernel::coupling_sum() const {
  double s = 0.0;
  for (const auto& [d, e] : alpha) {
    if (d != Offset{0, 0}) s += e.value;
  }
  return s;
}

AlphaKernel AlphaKernel::with_ambient(double t0) const {
  AlphaKernel k = *this;
  k.ambient = t0;
  return k;
}

AlphaKernel AlphaKernel::isolated(double ambient, double r_th) {
  AlphaKernel k;
  k.ambient = ambient;
  k.r_th = r_th;
  k.alpha[{0, 0}] = {1.0, 1.0};
  return k;
}

nlohmann::ordered_json kernel_to_json(const AlphaKernel& kernel) {
  nlohmann::ordered_json j;
  j["ambient_K"] = kernel.ambient;
  j["r_th_K_per_W"] = kernel.r_th;
  j["source_cell"] = {kernel.source_cell.row, kernel.source_cell.col};
  j["alpha"] = nlohmann::ordered_json::array();
  for (const auto& [d, e] : kernel.alpha) {
    j["alpha"].push_back({{"di", d.di}, {"dj", d.dj}, {"value", e.value}, {"r2", e.r_squared}});
  }
  return j;
}

namespace {
template <typename Json>
AlphaKernel parse_kernel(const Json& j) {
  try {
    AlphaKernel k;
    k.ambient = j.at("ambient_K").template get<double>();
    k.r_th = j.at("r_th_K_per_W").template get<double>();
    if (j.contains("source_cell")) {
      const auto& c = j.at("source_cell");
      k.source_cell = {c.at(0).template get<std::size_t>(), c.at(1).template get<std::size_t>()};
    }
    for (const auto& item : j.at("alpha")) {
      const Offset d{item.at("di").template get<int>(), item.at("dj").template get<int>()};
      AlphaEntry e;
      e.value = item.at("value").template get<double>();
      e.r_squared = item.contains("r2") ? item.at("r2").template get<double>() : 1.0;
      if (!(e.value > 0.0 && e.value <= 1.0 + 1e-6)) {
        throw Error(ErrorCode::ParseError, "alpha value outside (0, 1]");
      }
      k.alpha[d] = e;
    }
    if (!k.alpha.contains({0, 0})) {
      throw Error(ErrorCode::ParseError, "kernel lacks the (0,0) self term");
    }
    return k;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("alpha kernel: ") + e.what());
  }
}
}  // namespace

AlphaKernel kernel_from_json(const nlohmann::json& j) { return parse_kernel(j); }
AlphaKernel kernel_from_json(const nlohmann::ordered_json& j) { return parse_kernel(j); }

void save_kernel(const AlphaKernel& kernel, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << kernel_to_json(kernel).dump(2) << "\n";
}

AlphaKernel load_kernel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return kernel_from_json(j);
}

}  // namespace xhammer

#include "cprojlab/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>
#include <vector>

#include "cprojlab/errors.hpp"

namespace cprojlab {

std::string format_g17(double v) {
  char buf[40];
  snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

nlohmann::json json_g17(double v) {
  if (!std::isfinite(v)) return format_g17(v);
  // serialized through a raw token so the file carries exactly 17
  // significant digits
  return nlohmann::json::parse(format_g17(v), nullptr, true);
}

uint64_t fnv1a64(const std::string& bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(const std::string& bytes) {
  char buf[20];
  snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw DomainError("cannot open output file " + tmp);
    os << content;
  }
  std::filesystem::rename(tmp, path);
}

void write_json_atomic(const std::string& path, const nlohmann::json& j) {
  write_text_atomic(path, j.dump(2) + "\n");
}

int thread_cap_from_env() {
  const char* env = std::getenv("CPROJ_LAB_THREADS");
  if (env) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

void parallel_for(int count, const std::function<void(int)>& fn) {
  const int workers = std::min(thread_cap_from_env(), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (int i = w; i < count; i += workers) fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace cprojlab

#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "json.hpp"

namespace cprojlab {

inline constexpr const char* kToolVersion = "cproj-lab 0.1.0";

// all floating output carries 17 significant digits
std::string format_g17(double v);
nlohmann::json json_g17(double v);

uint64_t fnv1a64(const std::string& bytes);
std::string hash_hex(const std::string& bytes);

// temp file + rename
void write_text_atomic(const std::string& path, const std::string& content);
void write_json_atomic(const std::string& path, const nlohmann::json& j);

int thread_cap_from_env();  // CPROJ_LAB_THREADS, default 1x hardware

// static chunking over [0, count) with at most thread_cap_from_env()
// workers; fn(i) must be safe to run concurrently for distinct i
void parallel_for(int count, const std::function<void(int)>& fn);

}  // namespace cprojlab

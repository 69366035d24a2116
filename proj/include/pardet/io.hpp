#pragma once

#include <string>

#include <json.hpp>

#include "pardet/lidar.hpp"

namespace pardet {

// Binary point cloud: 16-byte header (8-byte magic "PDCLOUD\0", u32 version,
// u32 count), then little-endian records of (x, y, z float32, source_id u32).
void write_cloud(const ScanCloud& cloud, const std::string& path);
ScanCloud read_cloud(const std::string& path);

// Plain "x y z" lines, one point per row (debug output).
void write_cloud_xyz(const ScanCloud& cloud, const std::string& path);

// Write to <path>.tmp then rename, so readers never see partial files.
void atomic_write(const std::string& path, const std::string& content);

void write_json(const nlohmann::json& j, const std::string& path);
nlohmann::json read_json(const std::string& path);

uint64_t file_hash(const std::string& path);

}  // namespace pardet

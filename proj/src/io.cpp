#include "pardet/io.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pardet/error.hpp"
#include "pardet/hash.hpp"

namespace pardet {

namespace {
constexpr char kMagic[8] = {'P', 'D', 'C', 'L', 'O', 'U', 'D', '\0'};
constexpr uint32_t kCloudVersion = 1;

#pragma pack(push, 1)
struct CloudRecord {
  float x, y, z;
  uint32_t source_id;
};
#pragma pack(pop)
static_assert(sizeof(CloudRecord) == 16);
}  // namespace

std::string hash_hex(uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[h & 0xf];
    h >>= 4;
  }
  return s;
}

void write_cloud(const ScanCloud& cloud, const std::string& path) {
  std::ostringstream buf;
  buf.write(kMagic, 8);
  uint32_t version = kCloudVersion;
  uint32_t count = static_cast<uint32_t>(cloud.points.size());
  buf.write(reinterpret_cast<const char*>(&version), 4);
  buf.write(reinterpret_cast<const char*>(&count), 4);
  bool ids = cloud.has_source_ids();
  for (size_t i = 0; i < cloud.points.size(); ++i) {
    CloudRecord rec{static_cast<float>(cloud.points[i].x), static_cast<float>(cloud.points[i].y),
                    static_cast<float>(cloud.points[i].z),
                    ids ? cloud.source_ids[i] : 0xffffffffu};
    buf.write(reinterpret_cast<const char*>(&rec), sizeof(rec));
  }
  atomic_write(path, buf.str());
}

ScanCloud read_cloud(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open cloud file " + path);
  char magic[8];
  uint32_t version = 0, count = 0;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&count), 4);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw Error(ErrorCode::IoError, path + " is not a cloud file");
  if (version != kCloudVersion)
    throw Error(ErrorCode::IoError, path + " has unsupported version");
  ScanCloud cloud;
  cloud.points.reserve(count);
  cloud.source_ids.reserve(count);
  bool any_id = false;
  for (uint32_t i = 0; i < count; ++i) {
    CloudRecord rec;
    in.read(reinterpret_cast<char*>(&rec), sizeof(rec));
    if (!in) throw Error(ErrorCode::IoError, path + " is truncated");
    cloud.points.push_back({rec.x, rec.y, rec.z});
    cloud.source_ids.push_back(rec.source_id);
    any_id = any_id || rec.source_id != 0xffffffffu;
  }
  if (!any_id) cloud.source_ids.clear();
  return cloud;
}

void write_cloud_xyz(const ScanCloud& cloud, const std::string& path) {
  std::ostringstream buf;
  buf.precision(9);
  for (const Vec3& p : cloud.points) buf << p.x << " " << p.y << " " << p.z << "\n";
  atomic_write(path, buf.str());
}

void atomic_write(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::IoError, "short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "rename " + tmp + " -> " + path + ": " + ec.message());
}

void write_json(const nlohmann::json& j, const std::string& path) {
  atomic_write(path, j.dump(2) + "\n");
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::IoError, path + ": " + e.what());
  }
}

uint64_t file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  uint64_t h = 0xcbf29ce484222325ULL;
  char buf[65536];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
    h = fnv1a(buf, static_cast<size_t>(in.gcount()), h);
  return h;
}

}  // namespace pardet

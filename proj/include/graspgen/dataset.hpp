#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "graspgen/errors.hpp"
#include "graspgen/histogram.hpp"
#include "graspgen/record.hpp"

namespace graspgen {

enum class DatasetFormat { jsonl, binary };

struct Dataset {
  std::vector<GraspRecord> records;
  std::vector<ClosingRegionExtract> regions;  // sorted by record_ref

  bool operator==(const Dataset&) const = default;
};

inline constexpr std::size_t kObjectIdBytes = 64;
inline constexpr std::size_t kRecordHeaderBytes = 176;

/// Throws ValidationError on the first broken invariant.
inline void validate(const std::vector<GraspRecord>& records,
                     const std::vector<ClosingRegionExtract>& regions) {
  for (std::size_t k = 0; k < records.size(); ++k) {
    const auto& r = records[k];
    const std::string at = "record " + std::to_string(k) + ": ";
    if (!(std::abs(r.quaternion.norm() - 1.0) <= 1e-9))
      throw ValidationError(at + "quaternion is not unit length");
    if (!(r.final_score >= 0.0 && r.final_score <= r.score))
      throw ValidationError(at + "final_score outside [0, score]");
    if (r.has(kRemoved)) throw ValidationError(at + "removed records cannot be exported");
    if (r.object_id.size() > kObjectIdBytes || r.object_id.find('\0') != std::string::npos)
      throw ValidationError(at + "object_id must be at most 64 bytes without NUL");
    if (!r.translation.allFinite()) throw ValidationError(at + "non-finite translation");
  }
  std::vector<bool> used(records.size(), false);
  for (const auto& ex : regions) {
    if (ex.record_ref >= records.size()) throw ValidationError("region refers past the records");
    if (used[ex.record_ref]) throw ValidationError("two regions for one record");
    used[ex.record_ref] = true;
    if (ex.points.size() != ex.sides.size())
      throw ValidationError("region points and sides differ in length");
  }
}

namespace detail {

template <class T>
void put_le(std::string& buf, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                                  std::conditional_t<sizeof(T) == 2, std::uint16_t,
                                                                     std::uint8_t>>>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i)
    buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

template <class T>
T get_le(const std::string& buf, std::size_t& pos) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                                  std::conditional_t<sizeof(T) == 2, std::uint16_t,
                                                                     std::uint8_t>>>;
  if (pos + sizeof(T) > buf.size()) throw ParseError("binary dataset truncated");
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    bits |= static_cast<U>(static_cast<U>(static_cast<unsigned char>(buf[pos + i])) << (8 * i));
  pos += sizeof(T);
  return std::bit_cast<T>(bits);
}

inline std::vector<double> record_values(const GraspRecord& r) {
  return {r.translation.x(), r.translation.y(), r.translation.z(), r.quaternion[0],
          r.quaternion[1],   r.quaternion[2],   r.quaternion[3],   r.score,
          r.fc_mu_star,      r.d1,              r.d2,              r.weight,
          r.final_score};
}

inline std::string encode_binary(const Dataset& ds) {
  std::string buf = "GFD1";
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(ds.records.size()));
  std::vector<const ClosingRegionExtract*> by_ref(ds.records.size(), nullptr);
  for (const auto& ex : ds.regions) by_ref[ex.record_ref] = &ex;
  for (std::size_t k = 0; k < ds.records.size(); ++k) {
    const auto& r = ds.records[k];
    std::string id = r.object_id;
    id.resize(kObjectIdBytes, '\0');
    buf += id;
    for (double v : record_values(r)) put_le<double>(buf, v);
    put_le<std::uint8_t>(buf, r.flags);
    put_le<std::uint8_t>(buf, static_cast<std::uint8_t>(r.provenance));
    put_le<std::uint16_t>(buf, 0);
    const auto* ex = by_ref[k];
    const auto n = static_cast<std::uint32_t>(ex ? ex->points.size() : 0);
    put_le<std::uint32_t>(buf, n);
    if (ex) {
      for (const auto& p : ex->points)
        for (int d = 0; d < 3; ++d) put_le<float>(buf, p[d]);
      for (auto s : ex->sides) put_le<std::uint8_t>(buf, s);
    }
  }
  return buf;
}

inline Dataset decode_binary(const std::string& buf) {
  if (buf.size() < 8 || buf.compare(0, 4, "GFD1") != 0) throw ParseError("missing GFD1 magic");
  std::size_t pos = 4;
  const auto count = get_le<std::uint32_t>(buf, pos);
  Dataset ds;
  for (std::uint32_t k = 0; k < count; ++k) {
    if (pos + kObjectIdBytes > buf.size()) throw ParseError("binary dataset truncated");
    std::string id = buf.substr(pos, kObjectIdBytes);
    id.resize(std::min(id.find('\0'), id.size()));
    pos += kObjectIdBytes;
    GraspRecord r;
    r.object_id = id;
    double v[13];
    for (double& x : v) x = get_le<double>(buf, pos);
    r.translation = {v[0], v[1], v[2]};
    r.quaternion = {v[3], v[4], v[5], v[6]};
    r.score = v[7];
    r.fc_mu_star = v[8];
    r.d1 = v[9];
    r.d2 = v[10];
    r.weight = v[11];
    r.final_score = v[12];
    r.flags = get_le<std::uint8_t>(buf, pos);
    const auto prov = get_le<std::uint8_t>(buf, pos);
    if (prov > 1) throw ParseError("unknown provenance tag");
    r.provenance = static_cast<Provenance>(prov);
    get_le<std::uint16_t>(buf, pos);
    const auto n = get_le<std::uint32_t>(buf, pos);
    if (n > 0) {
      ClosingRegionExtract ex;
      ex.record_ref = k;
      ex.points.resize(n);
      for (auto& p : ex.points)
        for (int d = 0; d < 3; ++d) p[d] = get_le<float>(buf, pos);
      ex.sides.resize(n);
      for (auto& s : ex.sides) s = get_le<std::uint8_t>(buf, pos);
      ds.regions.push_back(std::move(ex));
    }
    ds.records.push_back(std::move(r));
  }
  if (pos != buf.size()) throw ParseError("trailing bytes after binary dataset");
  return ds;
}

inline nlohmann::ordered_json record_json(const GraspRecord& r, const ClosingRegionExtract* ex) {
  nlohmann::ordered_json j;
  j["object_id"] = r.object_id;
  j["px"] = r.translation.x();
  j["py"] = r.translation.y();
  j["pz"] = r.translation.z();
  j["qw"] = r.quaternion[0];
  j["qx"] = r.quaternion[1];
  j["qy"] = r.quaternion[2];
  j["qz"] = r.quaternion[3];
  j["score"] = r.score;
  if (std::isfinite(r.fc_mu_star))
    j["fc_mu_star"] = r.fc_mu_star;
  else
    j["fc_mu_star"] = nullptr;
  j["d1"] = r.d1;
  j["d2"] = r.d2;
  j["weight"] = r.weight;
  j["final_score"] = r.final_score;
  auto flags = nlohmann::ordered_json::array();
  for (const auto& [bit, name] : kFlagNames)
    if (r.has(bit)) flags.push_back(name);
  j["flags"] = flags;
  j["provenance"] = to_string(r.provenance);
  if (ex) {
    auto pts = nlohmann::ordered_json::array();
    for (const auto& p : ex->points)
      pts.push_back({static_cast<double>(p.x()), static_cast<double>(p.y()),
                     static_cast<double>(p.z())});
    j["region_points"] = pts;
    j["region_sides"] = ex->sides;
  }
  return j;
}

inline std::string encode_jsonl(const Dataset& ds) {
  std::vector<const ClosingRegionExtract*> by_ref(ds.records.size(), nullptr);
  for (const auto& ex : ds.regions) by_ref[ex.record_ref] = &ex;
  std::string out;
  for (std::size_t k = 0; k < ds.records.size(); ++k) {
    nlohmann::ordered_json j = record_json(ds.records[k], by_ref[k]);
    out += j.dump();
    out += '\n';
  }
  return out;
}

inline Dataset decode_jsonl(const std::string& text) {
  Dataset ds;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      GraspRecord r;
      r.object_id = j.at("object_id").get<std::string>();
      r.translation = {j.at("px").get<double>(), j.at("py").get<double>(), j.at("pz").get<double>()};
      r.quaternion = {j.at("qw").get<double>(), j.at("qx").get<double>(), j.at("qy").get<double>(),
                      j.at("qz").get<double>()};
      r.score = j.at("score").get<double>();
      r.fc_mu_star = j.at("fc_mu_star").is_null() ? std::numeric_limits<double>::infinity()
                                                  : j.at("fc_mu_star").get<double>();
      r.d1 = j.at("d1").get<double>();
      r.d2 = j.at("d2").get<double>();
      r.weight = j.at("weight").get<double>();
      r.final_score = j.at("final_score").get<double>();
      for (const auto& f : j.at("flags")) {
        const auto name = f.get<std::string>();
        bool known = false;
        for (const auto& [bit, fname] : kFlagNames)
          if (name == fname) {
            r.set(bit, true);
            known = true;
          }
        if (!known) throw ParseError("unknown flag '" + name + "'");
      }
      const auto prov = j.at("provenance").get<std::string>();
      if (prov == "orientation_sampled")
        r.provenance = Provenance::orientation_sampled;
      else if (prov == "antipodal_baseline")
        r.provenance = Provenance::antipodal_baseline;
      else
        throw ParseError("unknown provenance '" + prov + "'");
      if (j.contains("region_points")) {
        ClosingRegionExtract ex;
        ex.record_ref = static_cast<std::uint32_t>(ds.records.size());
        for (const auto& p : j.at("region_points"))
          ex.points.emplace_back(p.at(0).get<float>(), p.at(1).get<float>(), p.at(2).get<float>());
        ex.sides = j.at("region_sides").get<std::vector<std::uint8_t>>();
        ds.regions.push_back(std::move(ex));
      }
      ds.records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return ds;
}

/// Writes next to `path` and renames over it, so readers never see a
/// partial file.
inline void write_atomically(const std::filesystem::path& path, const std::string& bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename onto " + path.string());
  }
}

}  // namespace detail

/// Validates everything before touching the file system.
inline std::size_t export_dataset(const std::vector<GraspRecord>& records,
                                  const std::vector<ClosingRegionExtract>& regions,
                                  const std::filesystem::path& path, DatasetFormat format) {
  validate(records, regions);
  Dataset ds{records, regions};
  std::sort(ds.regions.begin(), ds.regions.end(),
            [](const auto& a, const auto& b) { return a.record_ref < b.record_ref; });
  detail::write_atomically(path, format == DatasetFormat::binary ? detail::encode_binary(ds)
                                                                 : detail::encode_jsonl(ds));
  return records.size();
}

/// Reads either format; binary files are recognised by their magic.
inline Dataset import_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();
  if (bytes.size() >= 4 && bytes.compare(0, 4, "GFD1") == 0) return detail::decode_binary(bytes);
  return detail::decode_jsonl(bytes);
}

struct DatasetStats {
  ScoreHistogram score_hist;
  ScoreHistogram final_hist;
  std::size_t total = 0;
  std::size_t removed = 0;
  double removal_fraction = 0.0;
  double mean_score = 0.0, median_score = 0.0;
  double mean_final = 0.0, median_final = 0.0;
};

namespace detail {

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : (v[h - 1] + v[h]) / 2.0;
}

inline double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace detail

/// Histograms and moments over the records not flagged removed.
inline DatasetStats stats(const std::vector<GraspRecord>& records) {
  DatasetStats s;
  s.total = records.size();
  std::vector<double> sc, fi;
  for (const auto& r : records) {
    if (r.has(kRemoved)) {
      ++s.removed;
      continue;
    }
    s.score_hist.add(r.score);
    s.final_hist.add(r.final_score);
    sc.push_back(r.score);
    fi.push_back(r.final_score);
  }
  s.removal_fraction = s.total ? static_cast<double>(s.removed) / static_cast<double>(s.total) : 0.0;
  s.mean_score = detail::mean(sc);
  s.median_score = detail::median(sc);
  s.mean_final = detail::mean(fi);
  s.median_final = detail::median(fi);
  return s;
}

}  // namespace graspgen

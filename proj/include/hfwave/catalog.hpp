#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

namespace hfwave {

/// Stable FNV-1a content hash; cache keys and tamper checks, not security.
inline std::string content_hash(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

struct CatalogEntry {
  std::string config_hash;
  std::string results_hash;
  std::string path;
};

/// Append-only index of run manifests keyed by the canonical config hash.
/// Re-running an identical config is detected and reported as cached; a
/// mismatch between the stored results hash and the results file on disk is
/// reported as corruption.
class RunCatalog {
public:
  explicit RunCatalog(const std::string& root) : root_(root) {
    std::filesystem::create_directories(root_);
  }

  std::string index_path() const { return root_ + "/catalog.txt"; }

  std::optional<CatalogEntry> lookup(const std::string& config_hash) const {
    std::ifstream in(index_path());
    if (!in) return std::nullopt;
    std::string ch, rh, path;
    std::optional<CatalogEntry> found;
    while (in >> ch >> rh >> path)
      if (ch == config_hash) found = CatalogEntry{ch, rh, path};
    return found;
  }

  /// True when the cached results file still matches its recorded hash.
  bool intact(const CatalogEntry& e) const {
    std::ifstream in(e.path, std::ios::binary);
    if (!in) return false;
    std::ostringstream body;
    body << in.rdbuf();
    return content_hash(body.str()) == e.results_hash;
  }

  void store(const std::string& config_hash, const std::string& results_path) {
    std::ifstream in(results_path, std::ios::binary);
    std::ostringstream body;
    body << in.rdbuf();
    std::ofstream out(index_path(), std::ios::app);
    out << config_hash << " " << content_hash(body.str()) << " " << results_path << "\n";
  }

private:
  std::string root_;
};

}  // namespace hfwave

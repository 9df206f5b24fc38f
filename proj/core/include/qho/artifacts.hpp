#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "qho/matrix.hpp"

namespace qho {

/// Fixed-point-free 12-significant-digit decimal rendering ('.' radix).
std::string format_number(double v);

// Writes the run outputs: CSV tables (',' separator, LF line endings),
// a key-value `summary` and a `manifest` echoing the inputs. Identical
// inputs produce byte-identical files except the manifest timestamp.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir);

  class Csv {
   public:
    Csv(ArtifactWriter& owner, std::string name, std::vector<std::string> header);
    void row(const std::vector<std::string>& cells);
    void close();
    ~Csv();

   private:
    ArtifactWriter& owner_;
    std::string name_;
    std::size_t width_;
    std::string body_;
    bool closed_ = false;
  };

  Csv csv(const std::string& name, std::vector<std::string> header);
  void summary(const std::vector<std::pair<std::string, std::string>>& entries);
  void manifest(const std::string& config_echo, unsigned seed = 0);

  const std::filesystem::path& dir() const { return dir_; }

 private:
  friend class Csv;
  void write_file(const std::string& name, const std::string& content);
  std::filesystem::path dir_;
};

}  // namespace qho

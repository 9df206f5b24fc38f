#include "qho/artifacts.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace qho {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

ArtifactWriter::ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

void ArtifactWriter::write_file(const std::string& name, const std::string& content) {
  std::ofstream out(dir_ / name, std::ios::binary);
  if (!out) throw Error("artifacts: cannot write " + (dir_ / name).string());
  out << content;
}

ArtifactWriter::Csv::Csv(ArtifactWriter& owner, std::string name,
                         std::vector<std::string> header)
    : owner_(owner), name_(std::move(name)), width_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) body_ += ',';
    body_ += header[i];
  }
  body_ += '\n';
}

void ArtifactWriter::Csv::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_)
    throw Error("artifacts: row width mismatch in " + name_);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) body_ += ',';
    body_ += cells[i];
  }
  body_ += '\n';
}

void ArtifactWriter::Csv::close() {
  if (!closed_) {
    owner_.write_file(name_, body_);
    closed_ = true;
  }
}

ArtifactWriter::Csv::~Csv() {
  try {
    close();
  } catch (...) {
  }
}

ArtifactWriter::Csv ArtifactWriter::csv(const std::string& name,
                                        std::vector<std::string> header) {
  return Csv(*this, name, std::move(header));
}

void ArtifactWriter::summary(
    const std::vector<std::pair<std::string, std::string>>& entries) {
  std::string body;
  for (const auto& [key, value] : entries) body += key + " = " + value + "\n";
  write_file("summary", body);
}

void ArtifactWriter::manifest(const std::string& config_echo, unsigned seed) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  std::string body;
  body += std::string("tool = qho ") + kVersion + "\n";
  body += "seed = " + std::to_string(seed) + "\n";
  body += std::string("timestamp = ") + stamp + "\n";
  body += "config = " + config_echo + "\n";
  write_file("manifest", body);
}

}  // namespace qho

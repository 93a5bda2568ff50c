#include "modem/usage_log.hpp"

#include <string>

#include <nlohmann/json.hpp>

#include "modem/errors.hpp"

namespace modem {

UsageLog::UsageLog(const std::filesystem::path& path) : path_(path) {
    file_.open(path, std::ios::app);
    if (!file_) throw IoError("cannot open usage log for appending: " + path.string());
}

void UsageLog::append(const UsageRecord& record) {
    std::string line = record.to_json().dump();
    std::lock_guard<std::mutex> lock(mutex_);
    file_ << line << '\n';
    file_.flush();
    if (!file_) throw IoError("failed appending to usage log: " + path_.string());
}

std::vector<UsageRecord> read_usage_log(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file) throw IoError("cannot open usage log: " + path.string());

    std::vector<UsageRecord> records;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(file, line)) {
        ++line_number;
        if (line.empty()) continue;
        try {
            records.push_back(UsageRecord::from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw SchemaError("usage log line " + std::to_string(line_number) + ": " + e.what());
        }
    }
    return records;
}

}  // namespace modem

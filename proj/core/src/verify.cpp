#include "jmlbench/verify.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

namespace jmlbench {

std::string_view to_string(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::Success: return "Success";
    case OutcomeKind::Failure: return "Failure";
    case OutcomeKind::Unknown: return "Unknown";
    case OutcomeKind::Invalid: return "Invalid";
  }
  return "?";
}

std::optional<OutcomeKind> outcome_kind_from_string(std::string_view name) {
  for (OutcomeKind k : kAllOutcomeKinds)
    if (to_string(k) == name) return k;
  return std::nullopt;
}

void validate_config(const VerifierConfig& config) {
  if (config.command_template.find("{file}") == std::string::npos)
    throw ConfigInvalid("command_template must contain {file}");
  if (!(config.timeout_seconds > 0))
    throw ConfigInvalid("timeout must be positive");
}

namespace {

void replace_all(std::string& text, std::string_view key, std::string_view value) {
  std::size_t at = 0;
  while ((at = text.find(key, at)) != std::string::npos) {
    text.replace(at, key.size(), value);
    at += value.size();
  }
}

std::string format_seconds(double seconds) {
  if (seconds == std::floor(seconds))
    return std::to_string(static_cast<long long>(seconds));
  std::ostringstream ss;
  ss << seconds;
  return ss.str();
}

std::string slurp_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BackendUnavailable("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string build_command(const VerifierConfig& config, const std::filesystem::path& file) {
  std::string cmd = config.command_template;
  replace_all(cmd, "{mode}", config.mode);
  replace_all(cmd, "{solver}", config.solver);
  replace_all(cmd, "{timeout}", format_seconds(config.timeout_seconds));
  replace_all(cmd, "{nullable_flag}", config.nullable_by_default ? "--nullable-by-default" : "");
  replace_all(cmd, "{arithmetic_flag}", config.arithmetic_mode ? "--arithmetic-mode" : "");
  replace_all(cmd, "{file}", file.string());
  return cmd;
}

uint64_t fnv1a64(std::string_view data) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string content_hash(std::string_view data) {
  static const char* hex = "0123456789abcdef";
  uint64_t h = fnv1a64(data);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = hex[h & 0xF];
    h >>= 4;
  }
  return out;
}

std::vector<Diagnostic> parse_diagnostics(const std::string& raw_output) {
  std::vector<Diagnostic> out;
  std::istringstream in(raw_output);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    constexpr std::string_view kVerify = ": verify: ";
    constexpr std::string_view kError = ": error: ";
    std::size_t at = line.find(kVerify);
    std::size_t marker_len = kVerify.size();
    std::size_t err_at = line.find(kError);
    if (err_at < at) {
      at = err_at;
      marker_len = kError.size();
    }
    if (at == std::string::npos) continue;

    std::string message = line.substr(at + marker_len);
    std::string prefix = line.substr(0, at);
    std::size_t colon = prefix.rfind(':');
    bool well_formed = colon != std::string::npos && colon + 1 < prefix.size();
    std::size_t line_no = 0;
    if (well_formed) {
      for (std::size_t i = colon + 1; i < prefix.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(prefix[i]))) {
          well_formed = false;
          break;
        }
        line_no = line_no * 10 + (prefix[i] - '0');
      }
    }
    if (!well_formed || line_no == 0 || message.empty()) {
      out.push_back(Diagnostic{"", 1, line, std::nullopt});
      continue;
    }
    out.push_back(Diagnostic{prefix.substr(0, colon), line_no, message, std::nullopt});
  }
  return out;
}

OutcomeKind classify_outcome(int exit_status, const std::vector<Diagnostic>& diagnostics,
                             bool timed_out, bool spec_parse_ok, bool inconclusive) {
  if (!spec_parse_ok) return OutcomeKind::Invalid;
  if (timed_out || inconclusive) return OutcomeKind::Unknown;
  if (!diagnostics.empty()) return OutcomeKind::Failure;
  if (exit_status != 0) return OutcomeKind::Unknown;
  return OutcomeKind::Success;
}

RawRun ExternalProcessBackend::run(const std::filesystem::path& file,
                                   const VerifierConfig& config) {
  std::string cmd = build_command(config, file);

  int fds[2];
  if (pipe(fds) != 0) throw BackendUnavailable("pipe failed");
  pid_t pid = fork();
  if (pid < 0) {
    close(fds[0]);
    close(fds[1]);
    throw BackendUnavailable("fork failed");
  }
  if (pid == 0) {
    setpgid(0, 0);
    dup2(fds[1], STDOUT_FILENO);
    dup2(fds[1], STDERR_FILENO);
    close(fds[0]);
    close(fds[1]);
    execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(fds[1]);

  RawRun result;
  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      std::chrono::duration<double>(config.timeout_seconds));
  char buf[4096];
  bool open = true;
  while (open) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (!result.timed_out && left.count() <= 0) {
      result.timed_out = true;
      kill(-pid, SIGKILL);
    }
    struct pollfd pfd = {fds[0], POLLIN, 0};
    int rc = poll(&pfd, 1, result.timed_out ? 1000 : static_cast<int>(std::max<long long>(left.count(), 1)));
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (rc == 0) continue;
    ssize_t n = read(fds[0], buf, sizeof(buf));
    if (n > 0)
      result.output.append(buf, static_cast<std::size_t>(n));
    else
      open = false;
  }
  close(fds[0]);

  int status = 0;
  waitpid(pid, &status, 0);
  if (WIFEXITED(status))
    result.exit_status = WEXITSTATUS(status);
  else if (WIFSIGNALED(status))
    result.exit_status = 128 + WTERMSIG(status);
  return result;
}

RawRun ReplayBackend::run(const std::filesystem::path& file, const VerifierConfig&) {
  std::string hash = content_hash(slurp_file(file));
  std::filesystem::path out_path = dir_ / (hash + ".out");
  std::filesystem::path exit_path = dir_ / (hash + ".exit");
  if (!std::filesystem::exists(out_path) || !std::filesystem::exists(exit_path))
    throw BackendUnavailable("no recording for " + hash + " in " + dir_.string());

  RawRun run;
  run.output = slurp_file(out_path);
  std::istringstream meta(slurp_file(exit_path));
  std::string word;
  meta >> run.exit_status;
  while (meta >> word)
    if (word == "timeout") run.timed_out = true;
  return run;
}

void record_replay(const std::filesystem::path& dir, const std::string& source,
                   const RawRun& run) {
  std::filesystem::create_directories(dir);
  std::string hash = content_hash(source);
  std::ofstream(dir / (hash + ".out"), std::ios::binary) << run.output;
  std::ofstream meta(dir / (hash + ".exit"));
  meta << run.exit_status;
  if (run.timed_out) meta << " timeout";
  meta << "\n";
}

RawRun FunctionBackend::run(const std::filesystem::path& file, const VerifierConfig&) {
  std::string source = slurp_file(file);
  std::lock_guard<std::mutex> lock(mu_);
  return fn_(source);
}

namespace {

std::size_t line_of(std::string_view text, std::size_t offset) {
  return 1 + static_cast<std::size_t>(
                 std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

std::string primary_class_name(const SyntaxTree& tree) {
  std::string name = "Program";
  bool found = false;
  tree.walk(tree.root(), [&](NodeId id) {
    if (found || tree.node(id).kind != NodeKind::ClassDecl) return;
    name = std::string(tree.token_text(tree.node(id).aux));
    found = true;
  });
  return name;
}

struct TempWorkspace {
  std::filesystem::path dir;
  TempWorkspace() {
    static std::atomic<uint64_t> counter{0};
    dir = std::filesystem::temp_directory_path() /
          ("jmlbench-" + std::to_string(getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(dir);
  }
  ~TempWorkspace() {
    std::error_code ec;
    std::filesystem::remove_all(dir, ec);
  }
};

}  // namespace

VerificationOutcome verify(const SpecifiedProgram& program, const VerifierConfig& config,
                           VerifierBackend& backend) {
  validate_config(config);

  VerificationOutcome outcome;
  SyntaxTree tree;
  try {
    tree = parse(program.source);
  } catch (const ParseError& e) {
    outcome.kind = OutcomeKind::Invalid;
    outcome.raw_output = e.what();
    return outcome;
  }

  TempWorkspace ws;
  std::filesystem::path file = ws.dir / (primary_class_name(tree) + ".java");
  std::ofstream(file, std::ios::binary) << program.source;

  auto start = std::chrono::steady_clock::now();
  RawRun raw = backend.run(file, config);
  outcome.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  outcome.raw_output = raw.output;
  outcome.diagnostics = parse_diagnostics(raw.output);

  StrippedProgram stripped = strip_annotations_source(program.source);
  for (Diagnostic& d : outcome.diagnostics) {
    if (d.file.empty()) continue;
    for (const AnnotationEntry& e : stripped.index.entries) {
      if (line_of(program.source, e.span.begin) == d.line) {
        d.anchor = e.span;
        break;
      }
    }
  }

  bool inconclusive = false;
  for (const std::string& marker : config.inconclusive_markers)
    if (!marker.empty() && raw.output.find(marker) != std::string::npos) inconclusive = true;

  outcome.kind =
      classify_outcome(raw.exit_status, outcome.diagnostics, raw.timed_out, true, inconclusive);
  return outcome;
}

std::vector<VerificationOutcome> verify_all(const std::vector<SpecifiedProgram>& programs,
                                            const VerifierConfig& config,
                                            VerifierBackend& backend, unsigned workers) {
  validate_config(config);
  std::vector<VerificationOutcome> results(programs.size());
  if (programs.empty()) return results;

  unsigned n = std::max(1u, std::min<unsigned>(workers, programs.size()));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < n; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < programs.size(); i = next++)
          results[i] = verify(programs[i], config, backend);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

}  // namespace jmlbench

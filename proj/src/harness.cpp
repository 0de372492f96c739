// SPDX-License-Identifier: Apache-2.0

#include "pfv/harness.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstring>
#include <sstream>

#include "pfv/util.hpp"

namespace pfv::harness {

namespace {

using Clock = std::chrono::steady_clock;

void ignore_sigpipe() {
    static bool done = [] {
        struct sigaction sa{};
        sa.sa_handler = SIG_IGN;
        sigaction(SIGPIPE, &sa, nullptr);
        return true;
    }();
    (void)done;
}

void set_nonblock(int fd) { fcntl(fd, F_SETFL, fcntl(fd, F_GETFL, 0) | O_NONBLOCK); }

int remaining_ms(Clock::time_point deadline) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now())
                    .count();
    if (left < 0) return 0;
    if (left > 60000) return 60000;
    return static_cast<int>(left);
}

}  // namespace

Workspace::Workspace(std::string build_command, std::chrono::milliseconds build_timeout,
                     std::chrono::milliseconds packet_timeout)
    : build_command_(std::move(build_command)),
      build_timeout_(build_timeout),
      packet_timeout_(packet_timeout) {
    std::string tpl =
        (std::filesystem::temp_directory_path() / "pfv-ws-XXXXXX").string();
    std::vector<char> buf(tpl.begin(), tpl.end());
    buf.push_back('\0');
    if (!mkdtemp(buf.data())) throw Error("harness", "mkdtemp failed");
    root_ = buf.data();
}

Workspace::Workspace(Workspace&& other) noexcept
    : root_(std::move(other.root_)),
      build_command_(std::move(other.build_command_)),
      build_timeout_(other.build_timeout_),
      packet_timeout_(other.packet_timeout_),
      owned_(other.owned_) {
    other.owned_ = false;
}

Workspace::~Workspace() {
    if (owned_) {
        std::error_code ec;
        std::filesystem::remove_all(root_, ec);
    }
}

void Workspace::write_source(const std::string& rel, const std::string& content) {
    std::filesystem::path p = std::filesystem::weakly_canonical(root_ / rel);
    auto canon_root = std::filesystem::weakly_canonical(root_);
    auto rel_check = std::filesystem::relative(p, canon_root);
    if (rel_check.empty() || rel_check.native().compare(0, 2, "..") == 0)
        throw Error("harness", "source path escapes the workspace: " + rel);
    write_file(p, content);
}

void Workspace::remove() {
    std::error_code ec;
    std::filesystem::remove_all(root_, ec);
    owned_ = false;
}

// ---------------------------------------------------------------------------
// subprocess plumbing
// ---------------------------------------------------------------------------

namespace {

struct Child {
    pid_t pid = -1;
    int in_fd = -1;   // our write end -> child stdin
    int out_fd = -1;  // child stdout
    int err_fd = -1;  // child stderr

    bool running() const { return pid > 0; }

    void close_fds() {
        for (int* fd : {&in_fd, &out_fd, &err_fd}) {
            if (*fd >= 0) close(*fd);
            *fd = -1;
        }
    }

    // Returns exit detail once the child is gone.
    std::string kill_and_reap() {
        if (pid <= 0) return "";
        kill(pid, SIGKILL);
        int status = 0;
        waitpid(pid, &status, 0);
        pid = -1;
        return describe(status);
    }

    // Non-blocking reap; empty string while still running.
    std::optional<std::string> try_reap() {
        if (pid <= 0) return std::string("");
        int status = 0;
        pid_t r = waitpid(pid, &status, WNOHANG);
        if (r == 0) return std::nullopt;
        pid = -1;
        return describe(status);
    }

    std::string wait_exit() {
        if (pid <= 0) return "";
        int status = 0;
        waitpid(pid, &status, 0);
        pid = -1;
        return describe(status);
    }

    static std::string describe(int status) {
        if (WIFEXITED(status)) return "exit status " + std::to_string(WEXITSTATUS(status));
        if (WIFSIGNALED(status)) {
            int sig = WTERMSIG(status);
            return std::string("killed by signal ") + std::to_string(sig) + " (" +
                   strsignal(sig) + ")";
        }
        return "unknown exit";
    }
};

Child spawn(const std::vector<std::string>& argv, const std::filesystem::path& cwd,
            bool merge_stderr) {
    ignore_sigpipe();
    int in_pipe[2], out_pipe[2], err_pipe[2] = {-1, -1};
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0)
        throw Error("harness", "pipe failed");
    if (!merge_stderr && pipe(err_pipe) != 0) throw Error("harness", "pipe failed");

    pid_t pid = fork();
    if (pid < 0) throw Error("harness", "fork failed");
    if (pid == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        dup2(merge_stderr ? out_pipe[1] : err_pipe[1], STDERR_FILENO);
        close(in_pipe[0]);
        close(in_pipe[1]);
        close(out_pipe[0]);
        close(out_pipe[1]);
        if (!merge_stderr) {
            close(err_pipe[0]);
            close(err_pipe[1]);
        }
        if (!cwd.empty() && chdir(cwd.c_str()) != 0) _exit(127);
        std::vector<char*> cargv;
        for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
        cargv.push_back(nullptr);
        execvp(cargv[0], cargv.data());
        _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    if (!merge_stderr) close(err_pipe[1]);

    Child c;
    c.pid = pid;
    c.in_fd = in_pipe[1];
    c.out_fd = out_pipe[0];
    c.err_fd = merge_stderr ? -1 : err_pipe[0];
    set_nonblock(c.in_fd);
    set_nonblock(c.out_fd);
    if (c.err_fd >= 0) set_nonblock(c.err_fd);
    return c;
}

}  // namespace

BuildResult build_module(const Workspace& ws, const std::vector<std::string>& sources) {
    if (sources.empty()) throw Error("precondition", "build_module needs at least one source");
    if (ws.build_command().empty())
        throw Error("harness", "no build command configured");

    std::string joined;
    for (const auto& s : sources) {
        if (!joined.empty()) joined += " ";
        joined += s;
    }
    std::string cmd = ws.build_command();
    auto replace_all = [](std::string& text, const std::string& from, const std::string& to) {
        for (std::size_t pos = 0; (pos = text.find(from, pos)) != std::string::npos;
             pos += to.size())
            text.replace(pos, from.size(), to);
    };
    const std::string output_name = "module.bin";
    replace_all(cmd, "{sources}", joined);
    replace_all(cmd, "{output}", output_name);

    Child child = spawn({"/bin/sh", "-c", cmd}, ws.root(), /*merge_stderr=*/true);
    close(child.in_fd);
    child.in_fd = -1;

    BuildResult result;
    auto deadline = Clock::now() + ws.build_timeout();
    std::string output;
    char buf[4096];
    bool open = true;
    while (open) {
        struct pollfd pfd{child.out_fd, POLLIN, 0};
        int rc = poll(&pfd, 1, remaining_ms(deadline));
        if (rc == 0 && Clock::now() >= deadline) {
            result.timed_out = true;
            result.diagnostics = output + "\n[build timed out]";
            child.kill_and_reap();
            child.close_fds();
            return result;
        }
        if (rc <= 0) continue;
        ssize_t n = read(child.out_fd, buf, sizeof(buf));
        if (n > 0)
            output.append(buf, static_cast<std::size_t>(n));
        else if (n == 0 || (n < 0 && errno != EAGAIN && errno != EINTR))
            open = false;
    }
    std::string exit_detail = child.wait_exit();
    child.close_fds();

    result.diagnostics = output;
    result.exit_code = exit_detail.rfind("exit status ", 0) == 0
                           ? std::atoi(exit_detail.c_str() + 12)
                           : -1;
    std::filesystem::path exe = ws.root() / output_name;
    result.ok = result.exit_code == 0 && std::filesystem::exists(exe);
    if (result.ok) result.executable = exe;
    return result;
}

const char* module_verdict_text(ModuleVerdict v) {
    switch (v) {
        case ModuleVerdict::Accept: return "accept";
        case ModuleVerdict::Reject: return "reject";
        case ModuleVerdict::Crash: return "crash";
        case ModuleVerdict::Timeout: return "timeout";
        case ModuleVerdict::ProtocolError: return "protocol-error";
    }
    return "?";
}

namespace {

struct ModuleRunner {
    std::filesystem::path exe;
    RunOptions opts;
    Child child;
    std::string out_buf;
    std::string err_buf;

    ~ModuleRunner() {
        if (child.running()) child.kill_and_reap();
        child.close_fds();
    }

    void ensure_running() {
        if (child.running()) return;
        std::vector<std::string> argv{exe.string()};
        if (opts.tracing) argv.push_back("--trace");
        child = spawn(argv, "", /*merge_stderr=*/false);
        out_buf.clear();
        err_buf.clear();
    }

    void restart_later() {
        child.kill_and_reap();
        child.close_fds();
    }

    // Drains whatever is readable right now.
    void drain(bool& out_closed) {
        char buf[4096];
        for (int fd : {child.out_fd, child.err_fd}) {
            if (fd < 0) continue;
            for (;;) {
                ssize_t n = read(fd, buf, sizeof(buf));
                if (n > 0) {
                    (fd == child.out_fd ? out_buf : err_buf)
                        .append(buf, static_cast<std::size_t>(n));
                } else if (n == 0) {
                    if (fd == child.out_fd) out_closed = true;
                    break;
                } else {
                    break;  // EAGAIN or error
                }
            }
        }
    }

    HarnessVerdict run_one(const gen::TestPacket& packet) {
        HarnessVerdict v;
        v.packet_id = packet.id;
        if (packet.bytes.size() > opts.max_frame) {
            v.verdict = ModuleVerdict::ProtocolError;
            v.detail = "frame larger than the harness limit";
            return v;
        }
        ensure_running();

        std::vector<std::uint8_t> frame;
        frame.reserve(4 + packet.bytes.size());
        std::uint32_t n = static_cast<std::uint32_t>(packet.bytes.size());
        frame.push_back(static_cast<std::uint8_t>(n >> 24));
        frame.push_back(static_cast<std::uint8_t>(n >> 16));
        frame.push_back(static_cast<std::uint8_t>(n >> 8));
        frame.push_back(static_cast<std::uint8_t>(n));
        frame.insert(frame.end(), packet.bytes.begin(), packet.bytes.end());

        auto deadline = Clock::now() + opts.packet_timeout;
        std::size_t written = 0;
        bool out_closed = false;
        std::size_t err_mark = err_buf.size();

        while (true) {
            // finished when a full line is available
            std::size_t nl = out_buf.find('\n');
            if (nl != std::string::npos) {
                std::string line = out_buf.substr(0, nl);
                out_buf.erase(0, nl + 1);
                if (!line.empty() && line.back() == '\r') line.pop_back();
                if (line == "1" || line == "0") {
                    v.verdict = line == "1" ? ModuleVerdict::Accept : ModuleVerdict::Reject;
                    if (opts.tracing) {
                        std::vector<std::pair<std::string, bool>> trace;
                        std::string fresh = err_buf.substr(err_mark);
                        std::size_t keep = fresh.rfind('\n');
                        for (const auto& tline :
                             split_lines(keep == std::string::npos
                                             ? std::string()
                                             : fresh.substr(0, keep))) {
                            std::istringstream is(tline);
                            std::string word, id;
                            int bit;
                            if (is >> word >> id >> bit && word == "CHECK")
                                trace.emplace_back(id, bit != 0);
                        }
                        v.trace = std::move(trace);
                    }
                } else {
                    v.verdict = ModuleVerdict::ProtocolError;
                    v.detail = "unexpected output line: " + line.substr(0, 80);
                    restart_later();
                }
                return v;
            }

            if (Clock::now() >= deadline) {
                v.verdict = ModuleVerdict::Timeout;
                v.detail = "no verdict within " +
                           std::to_string(opts.packet_timeout.count()) + " ms";
                restart_later();
                return v;
            }

            // child gone without a verdict?
            if (auto exit_detail = child.try_reap()) {
                bool dummy = false;
                drain(dummy);
                if (out_buf.find('\n') != std::string::npos) continue;
                child.close_fds();
                if (exit_detail->rfind("killed by signal", 0) == 0) {
                    v.verdict = ModuleVerdict::Crash;
                    v.detail = *exit_detail;
                } else {
                    v.verdict = ModuleVerdict::ProtocolError;
                    v.detail = "module exited before answering (" + *exit_detail + ")";
                }
                return v;
            }

            struct pollfd pfds[3];
            nfds_t count = 0;
            pfds[count++] = {child.out_fd, POLLIN, 0};
            if (child.err_fd >= 0) pfds[count++] = {child.err_fd, POLLIN, 0};
            if (written < frame.size()) pfds[count++] = {child.in_fd, POLLOUT, 0};
            poll(pfds, count, std::min(remaining_ms(deadline), 20));

            drain(out_closed);
            if (written < frame.size()) {
                ssize_t w = write(child.in_fd, frame.data() + written,
                                  frame.size() - written);
                if (w > 0) written += static_cast<std::size_t>(w);
                // EPIPE surfaces via try_reap on the next pass
            }
        }
    }
};

}  // namespace

std::vector<HarnessVerdict> run_module(const std::filesystem::path& executable,
                                       std::span<const gen::TestPacket> packets,
                                       const RunOptions& opts) {
    if (!std::filesystem::exists(executable))
        throw Error("harness", "module executable missing: " + executable.string());
    ModuleRunner runner{executable, opts, {}, {}, {}};
    std::vector<HarnessVerdict> out;
    out.reserve(packets.size());
    for (const auto& p : packets) out.push_back(runner.run_one(p));
    if (runner.child.running()) {
        close(runner.child.in_fd);
        runner.child.in_fd = -1;
        runner.child.wait_exit();
        runner.child.close_fds();
    }
    return out;
}

std::string MismatchReport::summary() const {
    std::ostringstream os;
    os << packets_run << " packets, " << false_rejects.size() << " false rejects, "
       << false_accepts.size() << " false accepts";
    return os.str();
}

namespace {

MismatchReport run_and_compare(const std::filesystem::path& executable,
                               const std::vector<gen::TestPacket>& packets,
                               const RunOptions& opts) {
    MismatchReport report;
    std::vector<HarnessVerdict> verdicts = run_module(executable, packets, opts);
    report.packets_run = packets.size();
    for (std::size_t i = 0; i < packets.size(); ++i) {
        const auto& p = packets[i];
        const auto& v = verdicts[i];
        if (p.expectation == gen::Verdict::Accept && v.verdict != ModuleVerdict::Accept)
            report.false_rejects.emplace_back(p, v);
        if (p.expectation == gen::Verdict::Reject && v.verdict != ModuleVerdict::Reject)
            report.false_accepts.emplace_back(p, v);
    }
    report.verdicts = std::move(verdicts);
    return report;
}

}  // namespace

MismatchReport semantic_check(const dsl::FormatSpec& spec,
                              const std::filesystem::path& executable, std::uint64_t seed,
                              std::size_t n, const SemanticCheckOptions& opts) {
    std::vector<gen::TestPacket> packets =
        gen::generate_positive(spec, seed, n, opts.gen);
    dsl::SpecStats st = dsl::spec_stats(spec);
    gen::NegativeGen negatives =
        gen::generate_negative(spec, seed, st.constraints + 3, opts.gen);
    for (auto& p : negatives.packets) {
        p.id += n;  // keep ids unique across the combined batch
        packets.push_back(std::move(p));
    }
    return run_and_compare(executable, packets, opts.run);
}

MismatchReport semantic_check_exhaustive(const dsl::FormatSpec& spec,
                                         const std::filesystem::path& executable,
                                         const RunOptions& opts) {
    std::uint64_t width = 0;
    for (const auto& path : dsl::enumerate_paths(spec)) {
        dsl::FlatPath flat = dsl::flatten_path(spec, path);
        if (flat.dyn_fields != 0)
            throw Error("harness", "exhaustive check needs a fixed-width spec");
        width = std::max(width, flat.static_bits);
    }
    if (width > 16 || width % 8 != 0)
        throw Error("harness", "exhaustive check covers specs up to 16 bits");

    std::vector<gen::TestPacket> packets;
    std::uint64_t id = 0;
    for (std::uint64_t len = 0; len <= width / 8; ++len) {
        std::uint64_t patterns = 1ULL << (8 * len);
        for (std::uint64_t v = 0; v < patterns; ++v) {
            gen::TestPacket p;
            p.id = id++;
            for (int i = static_cast<int>(8 * len) - 8; i >= 0; i -= 8)
                p.bytes.push_back(static_cast<std::uint8_t>((v >> i) & 0xff));
            p.expectation = gen::check_packet(spec, p.bytes).verdict;
            packets.push_back(std::move(p));
        }
    }
    return run_and_compare(executable, packets, opts);
}

}  // namespace pfv::harness

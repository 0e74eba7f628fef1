#include "agentkernel/sandbox.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "agentkernel/error.hpp"
#include "agentkernel/text.hpp"

namespace agentkernel {

namespace {

constexpr const char* runner_source = R"PY(
import json, os, sys

out = os.fdopen(3, "w")

def report(total, passed, failures):
    out.write(json.dumps({"total": total, "passed": passed, "failures": failures}))
    out.flush()

def describe(exc):
    if isinstance(exc, AssertionError):
        return str(exc) or "assertion failed"
    return type(exc).__name__ + ": " + str(exc)

def load(path, namespace):
    with open(path) as f:
        exec(compile(f.read(), path, "exec"), namespace)

solution = {"__name__": "solution"}
try:
    load("solution.py", solution)
except BaseException as exc:
    report(1, 0, [{"name": "<load solution>", "message": describe(exc)}])
    sys.exit(0)

tests = dict(solution)
tests["__name__"] = "tests"
try:
    load("tests.py", tests)
except BaseException as exc:
    report(1, 0, [{"name": "<load tests>", "message": describe(exc)}])
    sys.exit(0)

cases = [(k, v) for k, v in tests.items()
         if k.startswith("test") and callable(v) and solution.get(k) is not v]
passed = 0
failures = []
for name, fn in cases:
    try:
        fn()
        passed += 1
    except BaseException as exc:
        failures.append({"name": name, "message": describe(exc)})
report(len(cases), passed, failures)
)PY";

struct ScratchDir {
    std::filesystem::path path;

    ScratchDir() {
        std::string tmpl = (std::filesystem::temp_directory_path() / "agentkernel-sbx-XXXXXX").string();
        if (!::mkdtemp(tmpl.data())) {
            throw SandboxError(std::string("cannot create scratch directory: ") + std::strerror(errno));
        }
        path = tmpl;
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;
};

void write_file(const std::filesystem::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary);
    out << body;
    if (!out) throw SandboxError("cannot write " + p.string());
}

struct Pipe {
    int fds[2] = {-1, -1};
    explicit Pipe(int flags = 0) {
        if (::pipe2(fds, flags) != 0) throw SandboxError("pipe() failed");
    }
    ~Pipe() {
        close_read();
        close_write();
    }
    void close_read() {
        if (fds[0] >= 0) ::close(fds[0]);
        fds[0] = -1;
    }
    void close_write() {
        if (fds[1] >= 0) ::close(fds[1]);
        fds[1] = -1;
    }
};

struct ExecPlan {
    std::string dir;
    std::vector<std::string> args;
    std::vector<std::string> env;
    std::vector<char*> argv;
    std::vector<char*> envp;
    rlim_t cpu_seconds = 1;
    rlim_t memory_bytes = 0;
};

// Everything the child needs is allocated before fork(); the child itself does not allocate.
ExecPlan make_plan(const std::filesystem::path& dir, const SandboxLimits& limits) {
    ExecPlan plan;
    plan.dir = dir.string();
    plan.args = {limits.python, "-I", "runner.py"};
    plan.env = {"PATH=/usr/local/bin:/usr/bin:/bin", "HOME=" + plan.dir, "PYTHONDONTWRITEBYTECODE=1",
                "PYTHONHASHSEED=0"};
    for (auto& a : plan.args) plan.argv.push_back(a.data());
    plan.argv.push_back(nullptr);
    for (auto& e : plan.env) plan.envp.push_back(e.data());
    plan.envp.push_back(nullptr);
    plan.cpu_seconds = static_cast<rlim_t>(limits.wall_clock.count() / 1000 + 1);
    plan.memory_bytes = static_cast<rlim_t>(limits.memory_mb) * 1024 * 1024;
    return plan;
}

[[noreturn]] void exec_child(const ExecPlan& plan, int result_fd, int error_fd) {
    ::setpgid(0, 0);
    // Move the pipe ends out of the way before fds 0-4 are rewired.
    result_fd = ::fcntl(result_fd, F_DUPFD, 10);
    error_fd = ::fcntl(error_fd, F_DUPFD, 10);
    if (::chdir(plan.dir.c_str()) != 0) {
        int e = errno;
        (void)!::write(error_fd, &e, sizeof e);
        ::_exit(127);
    }
    int devnull = ::open("/dev/null", O_RDONLY);
    int out = ::open("stdout.log", O_WRONLY | O_CREAT | O_TRUNC, 0600);
    int err = ::open("stderr.log", O_WRONLY | O_CREAT | O_TRUNC, 0600);
    ::dup2(devnull, 0);
    ::dup2(out, 1);
    ::dup2(err, 2);
    ::dup2(result_fd, 3);
    int keep_error = ::dup2(error_fd, 4);
    ::closefrom(5);

    rlimit cpu{plan.cpu_seconds, plan.cpu_seconds + 1};
    ::setrlimit(RLIMIT_CPU, &cpu);
    rlimit mem{plan.memory_bytes, plan.memory_bytes};
    ::setrlimit(RLIMIT_AS, &mem);
    rlimit fsize{16 << 20, 16 << 20};
    ::setrlimit(RLIMIT_FSIZE, &fsize);
    ::fcntl(keep_error, F_SETFD, FD_CLOEXEC);

    ::execvpe(plan.argv[0], plan.argv.data(), plan.envp.data());
    int e = errno;
    (void)!::write(keep_error, &e, sizeof e);
    ::_exit(127);
}

} // namespace

TestReport run_unit_tests(const std::string& code, const std::string& tests,
                          const SandboxLimits& limits) {
    ScratchDir scratch;
    write_file(scratch.path / "solution.py", code);
    write_file(scratch.path / "tests.py", tests);
    write_file(scratch.path / "runner.py", runner_source);

    Pipe result;
    Pipe exec_error(O_CLOEXEC);

    const ExecPlan plan = make_plan(scratch.path, limits);
    const auto deadline = std::chrono::steady_clock::now() + limits.wall_clock;
    pid_t pid = ::fork();
    if (pid < 0) throw SandboxError(std::string("fork failed: ") + std::strerror(errno));
    if (pid == 0) exec_child(plan, result.fds[1], exec_error.fds[1]);
    ::setpgid(pid, pid);
    result.close_write();
    exec_error.close_write();

    int spawn_errno = 0;
    if (::read(exec_error.fds[0], &spawn_errno, sizeof spawn_errno) == sizeof spawn_errno) {
        ::waitpid(pid, nullptr, 0);
        throw SandboxError("cannot start '" + limits.python + "': " + std::strerror(spawn_errno));
    }

    std::string output;
    bool timed_out = false;
    char buf[4096];
    while (true) {
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
            deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) {
            timed_out = true;
            break;
        }
        pollfd p{result.fds[0], POLLIN, 0};
        int ready = ::poll(&p, 1, static_cast<int>(left.count()));
        if (ready < 0 && errno == EINTR) continue;
        if (ready == 0) {
            timed_out = true;
            break;
        }
        ssize_t n = ::read(result.fds[0], buf, sizeof buf);
        if (n <= 0) break;
        output.append(buf, static_cast<std::size_t>(n));
    }

    int status = 0;
    if (!timed_out) {
        // The result pipe closed; give the interpreter until the deadline to exit.
        while (true) {
            pid_t r = ::waitpid(pid, &status, WNOHANG);
            if (r == pid) break;
            if (std::chrono::steady_clock::now() >= deadline) {
                timed_out = true;
                break;
            }
            ::usleep(2000);
        }
    }
    if (timed_out) {
        ::kill(-pid, SIGKILL);
        ::waitpid(pid, &status, 0);
        auto ms = limits.wall_clock.count();
        return TestReport{1, 0, {{"timeout", "exceeded wall-clock limit of " + std::to_string(ms) + " ms"}}};
    }

    json parsed = json::parse(output, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object()) {
        std::string reason = "runner produced no report";
        if (WIFSIGNALED(status)) {
            int sig = WTERMSIG(status);
            reason = sig == SIGXCPU ? "cpu time limit exceeded"
                                    : "terminated by signal " + std::to_string(sig);
        } else if (WIFEXITED(status)) {
            reason += " (exit " + std::to_string(WEXITSTATUS(status)) + ")";
        }
        std::ifstream err(scratch.path / "stderr.log");
        std::string tail((std::istreambuf_iterator<char>(err)), {});
        if (tail.size() > 400) tail = tail.substr(tail.size() - 400);
        if (!text::trim(tail).empty()) reason += ": " + text::trim(tail);
        return TestReport{1, 0, {{"<runner>", reason}}};
    }
    return parsed.get<TestReport>();
}

std::optional<std::string> extract_code(std::string_view body) {
    auto open = body.find("```");
    if (open == std::string_view::npos) return std::nullopt;
    auto line_end = body.find('\n', open);
    if (line_end == std::string_view::npos) return std::nullopt;
    auto close = body.find("```", line_end + 1);
    if (close == std::string_view::npos) return std::nullopt;
    return std::string(body.substr(line_end + 1, close - line_end - 1));
}

} // namespace agentkernel

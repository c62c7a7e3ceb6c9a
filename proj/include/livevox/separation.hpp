#pragma once

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>

#include <poll.h>
#include <signal.h>
#include <stdlib.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "livevox/audio.hpp"
#include "livevox/error.hpp"
#include "livevox/wav.hpp"

namespace livevox {

inline constexpr std::string_view kVocalsFile = "vocals.wav";
inline constexpr std::string_view kAccompanimentFile = "accompaniment.wav";
inline constexpr std::string_view kInputPlaceholder = "{input}";
inline constexpr std::string_view kOutdirPlaceholder = "{outdir}";
inline constexpr double kDefaultSeparatorTimeoutSeconds = 600.0;

struct StemPair {
    MonoSignal vocals;
    MonoSignal accompaniment;
    std::string source_label;
};

enum class SeparatorMode { external_command, pre_separated };

inline std::string to_string(SeparatorMode m) {
    return m == SeparatorMode::external_command ? "external_command" : "pre_separated";
}

struct SeparatorSpec {
    SeparatorMode mode = SeparatorMode::pre_separated;
    std::string command_template;
    std::filesystem::path stems_dir;
    double timeout_seconds = kDefaultSeparatorTimeoutSeconds;

    static SeparatorSpec external(std::string command_template, double timeout_seconds = kDefaultSeparatorTimeoutSeconds) {
        return {SeparatorMode::external_command, std::move(command_template), {}, timeout_seconds};
    }

    static SeparatorSpec pre_separated(std::filesystem::path stems_dir) {
        return {SeparatorMode::pre_separated, {}, std::move(stems_dir), kDefaultSeparatorTimeoutSeconds};
    }

    void validate() const;
};

namespace detail {

inline std::size_t count_occurrences(std::string_view text, std::string_view needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + needle.size())) ++n;
    return n;
}

inline std::string shell_quote(std::string_view s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') {
            out += "'\\''";
        } else {
            out += c;
        }
    }
    out += '\'';
    return out;
}

inline void replace_once(std::string& text, std::string_view needle, std::string_view value) {
    const auto pos = text.find(needle);
    text.replace(pos, needle.size(), value);
}

struct ProcessResult {
    int exit_code = -1;
    bool timed_out = false;
    std::string stderr_tail;
};

/// Runs `command` through /bin/sh with inherited environment. The child's stdout goes to our
/// stderr; its stderr is captured (last 16 KiB kept). The whole process group is killed on timeout.
inline ProcessResult run_shell(const std::string& command, double timeout_seconds) {
    constexpr std::size_t kTailLimit = 16 * 1024;
    int err_pipe[2];
    if (pipe(err_pipe) != 0) fail(ErrorKind::separator, "pipe() failed");

    const pid_t pid = fork();
    if (pid < 0) {
        close(err_pipe[0]);
        close(err_pipe[1]);
        fail(ErrorKind::separator, "fork() failed");
    }
    if (pid == 0) {
        setpgid(0, 0);
        dup2(STDERR_FILENO, STDOUT_FILENO);
        dup2(err_pipe[1], STDERR_FILENO);
        close(err_pipe[0]);
        close(err_pipe[1]);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(err_pipe[1]);

    using clock = std::chrono::steady_clock;
    const auto deadline = clock::now() + std::chrono::duration_cast<clock::duration>(
                                             std::chrono::duration<double>(timeout_seconds));
    ProcessResult result;
    bool pipe_open = true;
    int status = 0;
    bool exited = false;
    char buf[4096];
    while (true) {
        if (!pipe_open) {
            const pid_t w = waitpid(pid, &status, WNOHANG);
            if (w == pid) {
                exited = true;
                break;
            }
        }
        const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now()).count();
        if (remaining <= 0) {
            result.timed_out = true;
            break;
        }
        if (pipe_open) {
            pollfd pfd{err_pipe[0], POLLIN, 0};
            const int ready = poll(&pfd, 1, static_cast<int>(std::min<long long>(remaining, 100)));
            if (ready > 0) {
                const ssize_t got = read(err_pipe[0], buf, sizeof buf);
                if (got > 0) {
                    result.stderr_tail.append(buf, static_cast<std::size_t>(got));
                    if (result.stderr_tail.size() > kTailLimit) {
                        result.stderr_tail.erase(0, result.stderr_tail.size() - kTailLimit);
                    }
                } else {
                    pipe_open = false;
                }
            }
        } else {
            std::this_thread::sleep_for(std::chrono::milliseconds(std::min<long long>(remaining, 10)));
        }
    }
    close(err_pipe[0]);

    if (result.timed_out) {
        kill(-pid, SIGKILL);
        kill(pid, SIGKILL);
        waitpid(pid, &status, 0);
        return result;
    }
    if (exited && WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else if (exited && WIFSIGNALED(status)) {
        result.exit_code = 128 + WTERMSIG(status);
    }
    return result;
}

inline std::filesystem::path make_temp_dir(std::string_view prefix) {
    std::string pattern = (std::filesystem::temp_directory_path() / (std::string(prefix) + "XXXXXX")).string();
    if (mkdtemp(pattern.data()) == nullptr) fail(ErrorKind::separator, "cannot create temporary directory");
    return pattern;
}

inline StemPair load_stem_dir(const std::filesystem::path& dir, std::string label, ErrorKind missing_kind) {
    const auto vocals_path = dir / kVocalsFile;
    const auto acc_path = dir / kAccompanimentFile;
    for (const auto& p : {vocals_path, acc_path}) {
        if (!std::filesystem::is_regular_file(p)) fail(missing_kind, "expected stem file '" + p.string() + "' is missing");
    }
    MonoSignal vocals = load_mono(vocals_path);
    MonoSignal acc = load_mono(acc_path);
    if (vocals.sample_rate() != acc.sample_rate()) {
        fail(missing_kind, "stem sample rates differ in '" + dir.string() + "': vocals " +
                               std::to_string(vocals.sample_rate()) + " Hz, accompaniment " +
                               std::to_string(acc.sample_rate()) + " Hz");
    }
    auto [v, a] = match_lengths(vocals, acc);
    return {std::move(v), std::move(a), std::move(label)};
}

}  // namespace detail

inline void SeparatorSpec::validate() const {
    if (!(timeout_seconds > 0.0)) fail_input("separator timeout must be positive");
    if (mode == SeparatorMode::external_command) {
        for (auto placeholder : {kInputPlaceholder, kOutdirPlaceholder}) {
            if (detail::count_occurrences(command_template, placeholder) != 1) {
                fail_input("separator command template must contain " + std::string(placeholder) +
                           " exactly once: '" + command_template + "'");
            }
        }
    } else if (stems_dir.empty()) {
        fail_input("pre-separated mode needs a stems directory");
    }
}

/// Substitutes shell-quoted paths for {input} and {outdir}.
inline std::string render_command(const std::string& command_template, const std::filesystem::path& input,
                                  const std::filesystem::path& outdir) {
    std::string cmd = command_template;
    detail::replace_once(cmd, kInputPlaceholder, detail::shell_quote(input.string()));
    detail::replace_once(cmd, kOutdirPlaceholder, detail::shell_quote(outdir.string()));
    return cmd;
}

/// Splits one recording into mono vocal and accompaniment stems of equal length.
///
/// External mode runs the separator in a fresh temporary directory, which is removed on
/// success and kept (and named in the error) on failure. Pre-separated mode only reads
/// stems_dir; `input` is used as the label.
inline StemPair separate(const SeparatorSpec& spec, const std::filesystem::path& input) {
    spec.validate();
    if (spec.mode == SeparatorMode::pre_separated) {
        return detail::load_stem_dir(spec.stems_dir, input.string(), ErrorKind::input);
    }

    if (!std::ifstream(input, std::ios::binary)) fail_input("cannot read separator input '" + input.string() + "'");
    const auto outdir = detail::make_temp_dir("livevox-sep-");
    const std::string command = render_command(spec.command_template, input, outdir);
    const auto run = detail::run_shell(command, spec.timeout_seconds);
    const std::string kept = " (output kept in '" + outdir.string() + "')";
    if (run.timed_out) {
        fail(ErrorKind::separator, "separator timed out after " + std::to_string(spec.timeout_seconds) + " s: " +
                                       command + kept + "\nstderr:\n" + run.stderr_tail);
    }
    if (run.exit_code != 0) {
        fail(ErrorKind::separator, "separator exited with code " + std::to_string(run.exit_code) + ": " + command +
                                       kept + "\nstderr:\n" + run.stderr_tail);
    }
    StemPair stems;
    try {
        stems = detail::load_stem_dir(outdir, input.string(), ErrorKind::separator);
    } catch (const Error& e) {
        fail(ErrorKind::separator, std::string("separator output unusable: ") + e.what() + kept);
    }
    std::error_code ec;
    std::filesystem::remove_all(outdir, ec);
    return stems;
}

}  // namespace livevox

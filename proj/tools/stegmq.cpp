// stegmq: the broker daemon.

#include <CLI11.hpp>

#include <csignal>
#include <iostream>

#include "stegolab/mq/broker.hpp"
#include "stegolab/mq/server.hpp"

using namespace stegolab;

int main(int argc, char** argv) {
  CLI::App app{"Steganographic message queue broker"};
  app.require_subcommand(1);
  std::string config_path;
  auto* serve = app.add_subcommand("serve", "Run the broker until SIGINT or SIGTERM");
  serve->add_option("--config", config_path, "Broker config file")->required();
  auto* check = app.add_subcommand("check", "Validate a config file and print it resolved");
  check->add_option("--config", config_path, "Broker config file")->required();
  CLI11_PARSE(app, argc, argv);

  try {
    const mq::BrokerConfig config = mq::load_config(config_path);
    if (*check) {
      std::cout << config.to_text();
      return 0;
    }

    // Block the signals before any thread starts so only sigwait sees them.
    sigset_t sigs;
    sigemptyset(&sigs);
    sigaddset(&sigs, SIGINT);
    sigaddset(&sigs, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &sigs, nullptr);

    mq::Broker broker(config);
    for (const auto& f : broker.recovery().quarantine_files) {
      std::cerr << "stegmq: quarantined corrupt log tail in " << f << "\n";
    }
    mq::Server server(broker, config.socket_path);
    server.start();
    std::cerr << "stegmq: serving " << to_string(config.scheme) << " on "
              << config.socket_path << "\n";
    int sig = 0;
    sigwait(&sigs, &sig);
    std::cerr << "stegmq: shutting down\n";
    server.stop();
  } catch (const std::exception& e) {
    std::cerr << "stegmq: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

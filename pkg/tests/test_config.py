import logging

from config.config import Config


def test_defaults_without_settings_file(tmp_path, caplog):
    with caplog.at_level(logging.DEBUG, logger='config.config'):
        cfg = Config(tmp_path / 'absent.env')
    assert cfg.log_level == 'INFO'
    assert cfg.enumeration_cap == 200_000
    assert cfg.parallel_runs is True
    assert cfg.trace_checkpoint_ms == 1000.0
    assert "using defaults" in caplog.text


def test_settings_are_read(tmp_path):
    settings = tmp_path / 'smanet.env'
    settings.write_text("SMANET_LOG_LEVEL=debug\n"
                        "SMANET_ENUMERATION_CAP=5000\n"
                        "SMANET_PARALLEL_RUNS=no\n"
                        "SMANET_TRACE_CHECKPOINT_MS=250\n", encoding='utf-8')
    cfg = Config(settings)
    assert cfg.log_level == 'DEBUG'
    assert cfg.enumeration_cap == 5000
    assert cfg.parallel_runs is False
    assert cfg.trace_checkpoint_ms == 250.0


def test_bad_values_keep_defaults(tmp_path, caplog):
    settings = tmp_path / 'smanet.env'
    settings.write_text("SMANET_LOG_LEVEL=chatty\n"
                        "SMANET_ENUMERATION_CAP=-3\n"
                        "SMANET_TRACE_CHECKPOINT_MS=soon\n", encoding='utf-8')
    cfg = Config(settings)
    assert cfg.log_level == 'INFO'
    assert cfg.enumeration_cap == 200_000
    assert cfg.trace_checkpoint_ms == 1000.0
    assert "SMANET_LOG_LEVEL" in caplog.text
    assert "SMANET_TRACE_CHECKPOINT_MS" in caplog.text

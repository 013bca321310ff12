import logging

from app.logging_config import LOG_FILE, setup_logging


def _tagged_handlers():
    return [h for h in logging.getLogger().handlers if getattr(h, "_stable_tails_handler", False)]


class TestSetupLogging:
    def teardown_method(self):
        root = logging.getLogger()
        for handler in _tagged_handlers():
            root.removeHandler(handler)
            handler.close()

    def test_repeated_calls_do_not_stack_handlers(self, tmp_path):
        setup_logging("DEBUG", str(tmp_path))
        setup_logging("DEBUG", str(tmp_path))
        assert len(_tagged_handlers()) == 2

    def test_writes_the_rotating_file(self, tmp_path):
        setup_logging("INFO", str(tmp_path))
        logging.getLogger("app.test").info("cell 3 of 4 done")
        for handler in _tagged_handlers():
            handler.flush()
        assert "cell 3 of 4 done" in (tmp_path / LOG_FILE).read_text()

    def test_unknown_level_falls_back_to_info(self, tmp_path):
        setup_logging("chatty", str(tmp_path))
        assert logging.getLogger().level == logging.INFO

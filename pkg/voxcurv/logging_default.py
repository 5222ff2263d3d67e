import logging
import datetime


def configure(console_level=logging.WARNING, file_level=logging.DEBUG, logfile_name=None):
    """
    Configures logging formatting. Console output goes to standard error so
    reports written to standard output are never interleaved with log lines.

    :param console_level: log level of console logger
    :param file_level: log level of file logger
    :param logfile_name: name of logfile, a date prefix is added
    """
    root_logger = logging.getLogger()
    root_logger.setLevel(logging.DEBUG)

    formatter = logging.Formatter(
        "[%(asctime)s] %(name)s %(funcName)s::%(lineno)s %(levelname)s - %(message)s",
        "%H:%M:%S"
    )

    # drop handlers of a previous configure() call, the CLI may be invoked repeatedly in one process
    for handler in list(root_logger.handlers):
        if getattr(handler, '_voxcurv', False):
            root_logger.removeHandler(handler)

    # create console logger
    console_handler = logging.StreamHandler()
    console_handler.setFormatter(formatter)
    console_handler.setLevel(console_level)
    console_handler._voxcurv = True

    root_logger.addHandler(console_handler)

    # create file logger
    if logfile_name is not None:
        today = datetime.datetime.now()
        name_of_file = today.strftime(f'%Y-%m-%d_%H-%M_{logfile_name}.log')

        file_handler = logging.FileHandler(name_of_file)
        file_handler.setLevel(file_level)
        file_handler.setFormatter(formatter)
        file_handler._voxcurv = True

        root_logger.addHandler(file_handler)

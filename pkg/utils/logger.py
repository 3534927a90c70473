"""
Logging utility for the 5G Puppeteer simulator

Everything goes to stderr: stdout is reserved for command results so that
reports, CSV and DOT output stay byte-identical between runs.
"""

import sys
from datetime import datetime

from utils.config import get_config


LEVELS = {"debug": 10, "info": 20, "warning": 30, "error": 40}


class Colors:
    """ANSI color codes for terminal output"""
    BLUE = '\033[94m'
    GREEN = '\033[92m'
    YELLOW = '\033[93m'
    RED = '\033[91m'
    CYAN = '\033[96m'
    MAGENTA = '\033[95m'
    BOLD = '\033[1m'
    UNDERLINE = '\033[4m'
    END = '\033[0m'


class Logger:
    """Simple leveled logger with clean formatting"""

    def __init__(self, module_name, use_colors=None, show_timestamps=None, level=None, stream=None):
        config = get_config()
        self.module_name = module_name
        self.stream = stream
        if use_colors is None:
            use_colors = config.get('logging', 'use_colors', default=True)
        if show_timestamps is None:
            show_timestamps = config.get('logging', 'show_timestamps', default=False)
        if level is None:
            level = config.get('logging', 'level', default='info')
        self.use_colors = bool(use_colors)
        self.show_timestamps = bool(show_timestamps)
        self.level = LEVELS.get(str(level).lower(), LEVELS['info'])

    @property
    def _out(self):
        # Resolved lazily so pytest's capsys sees the replaced stderr
        return self.stream if self.stream is not None else sys.stderr

    def _colored(self):
        return self.use_colors and hasattr(self._out, "isatty") and self._out.isatty()

    def _enabled(self, level):
        return LEVELS[level] >= self.level

    def _format_message(self, level, message, color=''):
        """Format log message"""
        timestamp = f"[{datetime.now().strftime('%H:%M:%S')}] " if self.show_timestamps else ""

        if self._colored() and color:
            return f"{timestamp}{color}[{self.module_name}] {level}: {message}{Colors.END}"
        return f"{timestamp}[{self.module_name}] {level}: {message}"

    def _emit(self, text):
        print(text, file=self._out)

    def debug(self, message):
        """Log debug message"""
        if self._enabled('debug'):
            self._emit(self._format_message("DEBUG", message, Colors.MAGENTA))

    def info(self, message):
        """Log info message"""
        if self._enabled('info'):
            self._emit(self._format_message("INFO", message, Colors.BLUE))

    def success(self, message):
        """Log success message"""
        if self._enabled('info'):
            self._emit(self._format_message("✓", message, Colors.GREEN))

    def warning(self, message):
        """Log warning message"""
        if self._enabled('warning'):
            self._emit(self._format_message("WARNING", message, Colors.YELLOW))

    def error(self, message):
        """Log error message"""
        self._emit(self._format_message("ERROR", message, Colors.RED))

    def step(self, step_num, total_steps, message):
        """Log step in a process"""
        if not self._enabled('info'):
            return
        if self._colored():
            self._emit(f"{Colors.CYAN}[{step_num}/{total_steps}]{Colors.END} {message}")
        else:
            self._emit(f"[{step_num}/{total_steps}] {message}")

    def metric(self, name, value, unit=''):
        """Log a metric"""
        if not self._enabled('info'):
            return
        unit_str = f" {unit}" if unit else ""
        if self._colored():
            self._emit(f"  {Colors.BOLD}{name}:{Colors.END} {value}{unit_str}")
        else:
            self._emit(f"  {name}: {value}{unit_str}")

    def section(self, title):
        """Log section header"""
        if not self._enabled('info'):
            return
        separator = "=" * 60
        if self._colored():
            self._emit(f"\n{Colors.BOLD}{Colors.CYAN}{separator}\n{title}\n{separator}{Colors.END}\n")
        else:
            self._emit(f"\n{separator}\n{title}\n{separator}\n")

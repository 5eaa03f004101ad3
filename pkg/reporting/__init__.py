from .chart_renderer import ChartRenderer
from .report_writer import ReportWriter

__all__ = ['ChartRenderer', 'ReportWriter']

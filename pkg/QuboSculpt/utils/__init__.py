"""
工具模块 - 日志、路径与文件输出
Utils module - logging, paths and file output.
"""

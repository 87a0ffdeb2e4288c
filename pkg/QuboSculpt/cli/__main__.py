"""
CLI 入口模块
CLI entry module.
"""

from QuboSculpt.cli.main import cli

if __name__ == "__main__":
    cli()

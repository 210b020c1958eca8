import pathlib
from setuptools import setup


def get_version():
    with open('pykneser/version.py') as version_file:
        namespace = {}
        exec(version_file.read(), namespace)
        return namespace['__version__']

VERSION = get_version()

# Read the README.md file
home_dir = pathlib.Path(__file__).parent
README = (home_dir / "README.md").read_text()

if __name__ == "__main__":
      setup(
            name='pykneser',
            version=VERSION,
            description='Kneser formula SAT instances, substitution and resolution proof checks, combinatorial oracles',
            long_description=README,
            long_description_content_type="text/markdown",
            license='GNU GPL',
            classifiers=["Programming Language :: Python :: 3"],
            packages=['pykneser'],
            python_requires='>=3.8',
            install_requires=['pandas', 'numpy>=1.20', 'scipy'],
            extras_require={'test': ['pytest', 'hypothesis', 'python-sat']},
            entry_points={'console_scripts': ['pykneser=pykneser.cli:main']}
      )

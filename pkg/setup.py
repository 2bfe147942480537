import os

from setuptools import setup, find_packages

here = os.path.abspath(os.path.dirname(__file__))
README = open(os.path.join(here, 'README.rst')).read()
CHANGES = open(os.path.join(here, 'CHANGES.rst')).read()
VERSION = open(os.path.join(here, 'VERSION')).read().strip()

requires = [
    'colander>=1.7',  # validation of the JSON profile files
    'cornice>=5.0',  # HTTP plan API
    'numpy>=1.20',
    'pyramid>=1.10',
    'scipy>=1.6',  # linprog with the highs method for branch-and-bound
    'simpy>=4.0',
    'unicodecsv>=0.14.1',
    'waitress>=1.4',
]

test_requirements = [
    'coverage',
    'mock',  # for creating mock objects
    'pytest',
    'webtest',
]

docs_require = [
    'sphinx',  # for generating the documentation
]

setup(name='edgesplit',
      version=VERSION,
      description='Bandwidth adaptive split inference between edge devices '
                  'and a cloud server (planning, simulation, transport)',
      long_description=README + '\n\n' + CHANGES,
      classifiers=[
          "Programming Language :: Python",
          "Programming Language :: Python :: 3",
          "Framework :: Pyramid",
          "Topic :: Scientific/Engineering :: Artificial Intelligence",
          "Topic :: System :: Distributed Computing",
      ],
      keywords='dnn partitioning edge cloud offloading quantization huffman',
      packages=find_packages(),
      include_package_data=True,
      package_data={
          'edgesplit': ['data/fixtures/*.json', 'data/fixtures/*.csv'],
      },
      zip_safe=False,
      python_requires='>=3.8',
      install_requires=requires,
      extras_require={
          'testing': test_requirements,
          'docs': docs_require,
      },
      entry_points="""\
      [paste.app_factory]
      main = edgesplit:main
      [console_scripts]
      edgesplit = edgesplit.scripts.cli:run_main
      """,
      )

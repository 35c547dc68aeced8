from setuptools import setup, find_packages

setup(name='vertical',
      version='0.1a',
      description="Vertical atomic broadcast simulator and checker",
      author='Vertical authors',
      license='APACHE2',
      packages=find_packages(exclude=['ez_setup', 'examples', 'tests']),
      package_data={'vertical': ['scenarios/*.json',
                                'scenarios/*.trace.jsonl']},
      include_package_data=True,
      zip_safe=False,
      install_requires=[
          "Twisted>=16.0",
          "mock>=1.0.1",
          "texttable>=0.8.1",
      ],
      entry_points={
          'console_scripts': ['vertical = vertical.cli:main'],
      })
